"""``mtf-lab`` command line front end.

    mtf-lab <command> --config <file> [--out <dir>] [--threads <n>] [--seed <n>] [--figures]

Exit status: 0 success, 1 configuration error, 2 numerical failure.  Each
run leaves ``manifest.json`` in the output directory; failures also leave
``error.json``.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, config as cfg, io
from .fields import Convolver, integrate
from .functionals import FunctionalSpec, energy
from .landau import (BisectionError, KineticRegime, landau_pressure, landau_pressure_derivative,
                     spin_pressure, spin_pressure_derivative, tau, tau_prime)
from .minimizer import BracketFailure, NotConverged, beta_sweep, minimize
from . import oracle, vlasov

log = logging.getLogger("mtf_lab")


class NumericalFailure(RuntimeError):
    pass


class Run:
    """Output bookkeeping for one command invocation."""

    def __init__(self, out: Path, figures: bool):
        self.out = out
        self.figures = figures
        self.artifacts = []
        self.timings = {}
        self.summary = {}

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, *paths):
        for p in paths:
            p = Path(p)
            if p not in self.artifacts:
                self.artifacts.append(p)

    def table(self, name, columns, rows):
        self.add(io.write_table(self.path(name), columns, rows))

    def json(self, name, obj):
        self.add(io.write_json(self.path(name), obj))

    def figure(self, fn, name, *args, **kw):
        if self.figures:
            from . import report
            self.add(getattr(report, fn)(*args, path=self.path(name), **kw))

    def timed(self, key):
        run = self

        class _T:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                run.timings[key] = time.perf_counter() - self.t
        return _T()


def _problem(p, grid, base):
    V = cfg.potential(p["potential"], grid, base)
    w = cfg.kernel(p.get("kernel"))
    return V, w


# ---------------------------------------------------------------------------
# commands


def cmd_pressure(p, run, seed, threads, base):
    Bs = cfg.values(p["B"], "parameters.B")
    nus = cfg.values(p["nu"], "parameters.nu")
    spin = p.get("spin", False)
    cols = ["B", "nu", "pressure", "derivative"]
    if spin:
        cols += ["pressure_down", "pressure_up", "derivative_down", "derivative_up"]
    rows = []
    for B in Bs:
        for nu in nus:
            row = [B, nu, landau_pressure(B, nu), landau_pressure_derivative(B, nu)]
            if spin:
                row += [spin_pressure(B, nu, -1), spin_pressure(B, nu, 1),
                        spin_pressure_derivative(B, nu, -1), spin_pressure_derivative(B, nu, 1)]
            rows.append(row)
    run.table("pressure.csv", cols, rows)
    run.figure("pressure_figure", "pressure.png", rows)
    run.summary = {"rows": len(rows)}


def cmd_tau(p, run, seed, threads, base):
    ts = cfg.values(p["t"], "parameters.t")
    rows, fig_rows = [], []
    for spec in p["regimes"]:
        R = cfg.regime(spec)
        t = np.asarray(ts)
        vals, der = np.asarray(tau(R, t)), np.asarray(tau_prime(R, t))
        beta = R.beta if R.tag == "MTF" else None
        for ti, v, d in zip(ts, vals, der):
            rows.append([R.tag, beta, ti, v, d])
            fig_rows.append((R.label, ti, v))
    run.table("tau.csv", ["regime", "beta", "t", "tau", "tau_prime"], rows)
    run.figure("tau_figure", "tau.png", fig_rows)
    run.summary = {"rows": len(rows)}


def _history_rows(res):
    return [[i + 1, e, c] for i, (e, c) in enumerate(res.history)]


def cmd_minimize(p, run, seed, threads, base):
    grid = cfg.grid(p["grid"])
    V, w = _problem(p, grid, base)
    R = cfg.regime(p["regime"])
    spec = FunctionalSpec(R, V, w)
    with run.timed("minimize"):
        res = minimize(spec, grid, cfg.solver(p.get("solver")))
    summary = res.summary()
    summary["grid"] = grid.to_dict()
    run.add(*io.write_density(run.path("density.csv"), res.rho, {"regime": R.label}))
    run.table("history.csv", ["iteration", "energy", "density_change"], _history_rows(res))
    run.json("summary.json", summary)
    run.figure("density_figure", "density.png", grid, res.rho.values, title=R.label)
    run.summary = summary
    if not res.converged:
        raise NumericalFailure(f"{R.label}: no convergence after {res.iterations} iterations "
                               "(best iterate written)")


def cmd_sweep(p, run, seed, threads, base):
    grid = cfg.grid(p["grid"])
    V, w = _problem(p, grid, base)
    betas = cfg.values(p["betas"], "parameters.betas")
    if any(b <= 0 for b in betas):
        raise cfg.ConfigError("betas must be positive", "parameters.betas")
    if betas != sorted(betas):
        raise cfg.ConfigError("betas must be sorted", "parameters.betas")
    solver = cfg.solver(p.get("solver"))
    spec = FunctionalSpec(KineticRegime.tf(), V, w)
    with run.timed("sweep"):
        rows = beta_sweep(spec, grid, solver, betas, threads)
    table = []
    for r in rows:
        e = r.result.energy
        table.append([r.beta, e.total, e.kinetic, e.external, e.interaction, r.mu, r.iterations, r.converged])
    run.table("sweep.csv", ["beta", "energy", "kinetic", "external", "interaction", "mu", "iterations",
                            "converged"], table)
    energies = [r.energy for r in rows]
    diffs = np.diff(energies)
    summary = {
        "betas": betas,
        "energies": energies,
        "all_converged": all(r.converged for r in rows),
        "monotone_nonincreasing": bool(np.all(diffs <= 0)),
        "monotone_nondecreasing": bool(np.all(diffs >= 0)),
    }
    ends = {}
    if p.get("endpoints", True):
        with run.timed("endpoints"):
            for R in (KineticRegime.tf(), KineticRegime.stf()):
                res = minimize(spec.with_regime(R), grid, solver)
                ends[R.tag] = res.summary()
        summary["endpoints"] = ends
        summary["relative_gap_first_vs_TF"] = energies[0] / ends["TF"]["energy"]["total"] - 1.0
        summary["relative_gap_last_vs_STF"] = energies[-1] / ends["STF"]["energy"]["total"] - 1.0
        summary["all_converged"] = summary["all_converged"] and all(e["converged"] for e in ends.values())
    run.json("sweep_summary.json", summary)
    run.figure("sweep_figure", "sweep.png", betas, energies,
               tf=ends.get("TF", {}).get("energy", {}).get("total"),
               stf=ends.get("STF", {}).get("energy", {}).get("total"))
    run.summary = {k: summary[k] for k in summary if k != "endpoints"}
    if not summary["all_converged"]:
        raise NumericalFailure("at least one sweep row did not converge (best iterates written)")


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def _identity_rows(label, beta, spec, res, m, intervals):
    rho = res.rho
    E = energy(spec, rho).total
    conv = Convolver(spec.w, rho.grid)
    Ev = vlasov.vlasov_energy(m, spec.V, spec.w, conv).total
    Eq = vlasov.vlasov_energy_quadrature(m, spec.V, spec.w, intervals).total
    rt = float(np.max(np.abs(vlasov.vlasov_density(m).values - rho.values)))
    kin_fn = integrate(rho.grid, np.asarray(tau(spec.regime, rho.total())))
    return {
        "case": label, "beta": beta, "converged": res.converged,
        "energy_functional": E, "energy_vlasov": Ev, "energy_vlasov_quadrature": Eq,
        "rel_energy_closed_form": _rel(Ev, E), "rel_energy_quadrature": _rel(Eq, E),
        "rel_kinetic": _rel(vlasov.vlasov_kinetic(m), kin_fn), "density_round_trip": rt,
    }


def cmd_vlasov_check(p, run, seed, threads, base):
    grid = cfg.grid(p["grid"])
    V, w = _problem(p, grid, base)
    betas = cfg.values(p["betas"], "parameters.betas")
    if any(b <= 0 for b in betas):
        raise cfg.ConfigError("betas must be positive", "parameters.betas")
    solver = cfg.solver(p.get("solver"))
    intervals = p.get("quadrature_intervals", vlasov.ORACLE_INTERVALS)
    n_spot = p.get("spot_checks", 20)
    rng = np.random.default_rng(seed)

    def mtf_row(beta):
        spec = FunctionalSpec(KineticRegime.mtf(beta), V, w)
        res = minimize(spec, grid, solver)
        m = vlasov.bathtub_from_density(res.rho, "MTF", beta)
        return _identity_rows("magnetic", beta, spec, res, m, intervals), m

    with run.timed("identities"):
        if threads > 1 and len(betas) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                out = list(pool.map(mtf_row, betas))
        else:
            out = [mtf_row(b) for b in betas]
        rows = [o[0] for o in out]
        for label, R, reg in (("strong", KineticRegime.stf(), "STF"), ("weak", KineticRegime.tf(), "WEAK")):
            spec = FunctionalSpec(R, V, w)
            res = minimize(spec, grid, solver)
            m = vlasov.bathtub_from_density(res.rho, reg, b=1.0)
            rows.append(_identity_rows(label, None, spec, res, m, intervals))

    with run.timed("counting_and_bathtub"):
        bs = 10.0 ** rng.uniform(-2, 2, 1000)
        nus = rng.uniform(0, 50, 1000)
        count_err = max(_rel(vlasov.phase_count(b, n), vlasov.phase_count_enumerated(b, n)) if n > 0
                        else abs(vlasov.phase_count(b, n)) for b, n in zip(bs, nus))
        margins = []
        for (row, m) in out:
            lv = m.level[m.level > 0]
            if lv.size == 0:
                continue
            for level in rng.choice(lv, size=min(n_spot, lv.size), replace=False):
                cell = vlasov.lattice_cell(m.beta, float(level))
                margins.append(vlasov.bathtub_spot_check(cell, rng, trials=200))
    summary = {
        "cases": rows,
        "max_rel_energy_closed_form": max(r["rel_energy_closed_form"] for r in rows),
        "max_rel_energy_quadrature": max(r["rel_energy_quadrature"] for r in rows),
        "max_density_round_trip": max(r["density_round_trip"] for r in rows),
        "counting_identity_max_rel": count_err,
        "bathtub_spot_checks": len(margins),
        "bathtub_min_margin": min(margins) if margins else None,
        "weak_spin_independent": _weak_spin_independent(grid, rng),
    }
    cols = ["case", "beta", "converged", "energy_functional", "energy_vlasov", "energy_vlasov_quadrature",
            "rel_energy_closed_form", "rel_energy_quadrature", "rel_kinetic", "density_round_trip"]
    run.table("vlasov_check.csv", cols, [[r[c] for c in cols] for r in rows])
    run.json("vlasov_check.json", summary)
    run.summary = {k: v for k, v in summary.items() if k != "cases"}
    if not all(r["converged"] for r in rows):
        raise NumericalFailure("a minimization inside vlasov-check did not converge")


def _weak_spin_independent(grid, rng) -> bool:
    from .fields import gaussian_density
    m = vlasov.bathtub_from_density(gaussian_density(grid), "WEAK", b=1.0)
    for _ in range(200):
        cell = tuple(int(rng.integers(0, n)) for n in grid.shape)
        u = tuple(grid.axis(i)[cell[i]] for i in range(3))
        p = rng.normal(size=3) * math.sqrt(m.level[cell] + 1e-12)
        occ = [vlasov.occupation(m, cell, vlasov.PhaseSpacePoint(u, p, 0, s)) for s in (-1, 1)]
        if occ[0] != occ[1]:
            return False
    return True


def cmd_weyl(p, run, seed, threads, base):
    template = oracle.OracleProblem.from_profile(p["profile"], half_length=p["half_length"],
                                                 area=p.get("area", 1.0), z_points=p.get("z_points"))
    hbars = cfg.values(p["hbars"], "parameters.hbars")
    if any(h <= 0 for h in hbars):
        raise cfg.ConfigError("hbars must be positive", "parameters.hbars")
    with run.timed("weyl"):
        res = oracle.weyl_sweep(template, hbars, p["b_rule"], p["value"])
    run.table("weyl.csv", ["hbar", "b", "quantum_sum", "semiclassical", "ratio"], [r.row() for r in res])
    if p.get("per_band", False):
        run.json("weyl_per_band.json", [{"hbar": r.hbar, "b": r.b, "bands": r.per_band_json()} for r in res])
    defined = [r for r in res if r.defined]
    summary = {
        "b_rule": p["b_rule"], "value": p["value"],
        "deviations": [abs(r.ratio - 1.0) if r.defined else None for r in res],
        "undefined_rows": [r.hbar for r in res if not r.defined],
        "under_resolved_rows": [r.hbar for r in res if not r.resolved],
        "z_points": [r.z_points for r in res],
        "deviation_decreasing": oracle.strictly_decreasing(defined) if len(defined) > 1 else None,
        "deviation_decreasing_with_jitter": oracle.deviations_decrease(defined) if len(defined) > 2 else None,
    }
    run.json("weyl_summary.json", summary)
    run.figure("weyl_figure", "weyl.png", [r.hbar for r in defined], [r.ratio for r in defined])
    run.summary = summary


COMMANDS = {
    "pressure": cmd_pressure,
    "tau": cmd_tau,
    "minimize": cmd_minimize,
    "sweep": cmd_sweep,
    "vlasov-check": cmd_vlasov_check,
    "weyl": cmd_weyl,
}


# ---------------------------------------------------------------------------
# driver


def _versions() -> dict:
    from importlib.metadata import PackageNotFoundError, version

    out = {"mtf_lab": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "scipy", "jsonschema"):
        try:
            out[pkg] = version(pkg)
        except PackageNotFoundError:
            out[pkg] = "unknown"
    return out


def _threads(arg) -> int:
    if arg is not None:
        n = arg
        key = "--threads"
    else:
        env = os.environ.get("MTF_LAB_THREADS")
        if env is None:
            return 1
        key = "MTF_LAB_THREADS"
        try:
            n = int(env)
        except ValueError:
            raise cfg.ConfigError(f"MTF_LAB_THREADS={env!r} is not an integer", key)
    if n < 1:
        raise cfg.ConfigError("thread count must be >= 1", key)
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtf-lab", description="Magnetic Thomas-Fermi numerics.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON configuration file")
    ap.add_argument("--out", help="output directory (default: config output_dir or ./mtf-lab-out)")
    ap.add_argument("--threads", type=int, help="worker threads (fallback: MTF_LAB_THREADS, then 1)")
    ap.add_argument("--seed", type=int, help="seed for randomized checks (overrides config)")
    ap.add_argument("--figures", action="store_true", help="also render PNG figures")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    out = Path(args.out) if args.out else None
    config = None
    status, code, error = "ok", 0, None
    r = None
    try:
        config = cfg.load(args.config, args.command)
        if out is None:
            out = Path(config.get("output_dir", "mtf-lab-out"))
        r = Run(out, args.figures)
        threads = _threads(args.threads)
        seed = args.seed if args.seed is not None else config.get("seed", 0)
        if seed < 0:
            raise cfg.ConfigError("seed must be >= 0", "seed")
        base = Path(args.config).resolve().parent
        COMMANDS[args.command](config["parameters"], r, seed, threads, base)
    except cfg.ConfigError as exc:
        status, code = "error", 1
        error = {"kind": "config", "key": exc.key, "message": str(exc)}
    except (NumericalFailure, NotConverged, BracketFailure, BisectionError) as exc:
        status, code = "error", 2
        error = {"kind": "numerical", "type": type(exc).__name__, "message": str(exc)}
    out = out or Path("mtf-lab-out")
    if r is None:
        r = Run(out, False)
    if error is not None:
        r.json("error.json", dict(error, command=args.command, exit_code=code))
        print(f"mtf-lab: {error['kind']} error: {error['message']}"
              + (f" (key: {error['key']})" if error.get("key") else ""), file=sys.stderr)
    r.timings["total"] = time.perf_counter() - t0
    manifest = {
        "command": args.command,
        "status": status,
        "exit_code": code,
        "config": config,
        "seed": args.seed if args.seed is not None else (config or {}).get("seed", 0),
        "versions": _versions(),
        "timings": r.timings,
        "summary": r.summary,
        "artifacts": [{"path": p.name, "sha256": io.sha256(p), "bytes": p.stat().st_size}
                      for p in r.artifacts],
    }
    io.write_json(out / "manifest.json", manifest)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
