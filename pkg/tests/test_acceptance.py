"""Acceptance criteria 1-11.

Each criterion is a plain function that raises ``AssertionError`` on failure
and returns a one-line detail string.  ``pytest`` runs them as tests; the
summary lines are printed at the end of the session (see ``conftest.py``).
Running this file directly executes all criteria and prints the same lines.
"""

import functools
import json
import math
import sys
import time

import numpy as np
import pytest

from mtf_lab import landau as L
from mtf_lab.fields import Grid3, InteractionKernel, Potential
from mtf_lab.functionals import FunctionalSpec, energy
from mtf_lab.landau import KineticRegime, LtConstants
from mtf_lab.minimizer import MinimizerConfig, beta_sweep, minimize
from mtf_lab.oracle import OracleProblem, quantum_sum, semiclassical_energy, strictly_decreasing, weyl_sweep
from mtf_lab import vlasov

RESULTS = {}  # number -> (passed, detail, seconds, budget)


def criterion(number, title, budget):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            try:
                detail = fn()
            except AssertionError as exc:
                RESULTS[number] = (False, f"{title}: {exc}", time.perf_counter() - t0, budget)
                raise
            dt = time.perf_counter() - t0
            ok = budget is None or dt < budget
            note = "" if ok else f" (runtime {dt:.1f}s over budget {budget:g}s)"
            RESULTS[number] = (ok, f"{title}: {detail}{note}", dt, budget)
            assert ok, note.strip()
            return detail
        run.number = number
        return run
    return wrap


def summary_lines():
    lines = []
    for n in sorted(RESULTS):
        ok, detail, dt, _ = RESULTS[n]
        lines.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} [{dt:6.1f}s] {detail}")
    return lines


# ---------------------------------------------------------------------------


@criterion(1, "Landau closed forms", 1.0)
def c1():
    P = L.landau_pressure(1.0, 1.0)
    dP = L.landau_pressure_derivative(1.0, 1.0)
    assert abs(P / (1 / (3 * math.pi**2)) - 1) <= 1e-14, P
    assert abs(dP / (1 / (2 * math.pi**2)) - 1) <= 1e-14, dP
    rng = np.random.default_rng(101)
    worst = 0.0
    for B, nu in zip(10.0 ** rng.uniform(-2, 2, 1000), rng.uniform(0, 50, 1000)):
        tot = L.landau_pressure(B, nu)
        s = L.spin_pressure(B, nu, -1) + L.spin_pressure(B, nu, 1)
        worst = max(worst, abs(s - tot) / tot)
    assert worst <= 1e-14, f"spin-sum identity off by {worst:.2e}"
    return f"P, P' exact to 1e-14; spin-sum max rel {worst:.1e} over 1000 samples"


def _golden_max(f, lo, hi, iters=80):
    """Vectorized golden-section maximization of concave ``f`` on [lo, hi], one evaluation per step."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo.copy(), hi.copy()
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        x = np.where(left, b - g * (b - a), a + g * (b - a))
        fx = f(x)
        c, d = np.where(left, x, d), np.where(left, c, x)
        fc, fd = np.where(left, fx, fd), np.where(left, fc, fx)
    return np.maximum(fc, fd)


@criterion(2, "Legendre duality", 5.0)
def c2():
    beta, nu = np.meshgrid(np.logspace(-2, 2, 50), np.logspace(-2, 2, 50), indexing="ij")
    kb, pref = L.k_beta(beta), L.pressure_prefactor(beta)
    exact = pref * L.landau_pressure(kb, nu)
    # the maximizing t is pref * P'(nu); bracket it generously
    hi = 4.0 * pref * L.landau_pressure_derivative(kb, nu) + 1.0
    sup = _golden_max(lambda t: nu * t - L.tau_mtf(beta, t), np.zeros_like(nu), hi)
    worst = float(np.max(np.abs(sup / exact - 1)))
    assert worst < 1e-8, f"double transform rel error {worst:.2e}"
    rng = np.random.default_rng(202)
    c = LtConstants()
    t = 10.0 ** rng.uniform(-3, 2, 10_000)
    v = 10.0 ** rng.uniform(-3, 2, 10_000)
    B = 10.0 ** rng.uniform(-3, 2, 10_000)
    F = L.lt_legendre(c, B, t)
    bound = F + c.L1 * B * v**1.5 + c.L2 * v**2.5
    rel = float(np.min((bound - t * v) / bound))
    assert rel >= -1e-12, f"Fenchel-Young violated by {rel:.2e}"
    return f"50x50 grid rel error {worst:.1e}; Fenchel-Young min rel slack {rel:.1e} on 1e4 triples"


@criterion(3, "Regime limits of tau", 1.0)
def c3():
    t = np.logspace(-2, 1, 200)
    weak = np.max(np.abs(np.asarray(L.tau(KineticRegime.mtf(1e-4), t)) / L.tau(KineticRegime.tf(), t) - 1))
    beta = 1e4
    kb = L.k_beta(beta)
    # lowest-band window: r < 2 k_beta
    t_edge = L.pressure_prefactor(beta) * L.landau_pressure_derivative(kb, 2 * kb)
    ts = t_edge * np.logspace(-6, 0, 200, endpoint=False)
    strong = np.max(np.abs(np.asarray(L.tau(KineticRegime.mtf(beta), ts)) / L.tau(KineticRegime.stf(), ts) - 1))
    assert weak < 1e-3, f"TF limit {weak:.2e}"
    assert strong < 1e-3, f"STF limit {strong:.2e}"
    return f"beta=1e-4 vs TF {weak:.1e} on [0.01, 10]; beta=1e4 vs STF {strong:.1e} below t={t_edge:.3g}"


@criterion(4, "Spin chain inequality", 2.0)
def c4():
    worst = -math.inf
    for beta in np.logspace(-1, 1, 20):
        kb = L.k_beta(beta)
        t = np.logspace(-4, 1, 20)
        down = np.asarray(L.tau_spin(beta, t, -1))
        up = np.asarray(L.tau_spin(beta, t, 1))
        full = np.asarray(L.tau(KineticRegime.mtf(beta), 2 * t))
        chain = [2 * down, full, down + up, 2 * down + 4 * kb * t]
        for lo, hi in zip(chain, chain[1:]):
            worst = max(worst, float(np.max(lo - hi)))
    assert worst <= 1e-12, f"violation {worst:.2e}"
    return f"400 points, largest lhs - rhs {worst:.1e}"


@criterion(5, "Harmonic TF benchmark", 60.0)
def c5():
    g = Grid3(2.0, 64)
    res = minimize(FunctionalSpec(KineticRegime.tf(), Potential.harmonic(1.0)), g)
    target = 2 * 3 ** (1 / 3)
    err = abs(res.mu / target - 1)
    assert res.converged, "no convergence"
    assert err < 5e-3, f"mu={res.mu:.8g}, rel {err:.2e}"
    assert res.residual < 1e-5, f"residual {res.residual:.2e}"
    return f"mu={res.mu:.8f} (rel {err:.1e}), residual {res.residual:.1e}, {res.iterations} iterations"


VLASOV_GRID = Grid3(2.5, 32)
VLASOV_SPEC = dict(V=Potential.harmonic(1.0), w=InteractionKernel.gaussian(1.0, 0.5))


@criterion(6, "MTF <-> Vlasov equivalence", 90.0)
def c6():
    parts = []
    for beta in (0.5, 2.0, 8.0):
        t0 = time.perf_counter()
        spec = FunctionalSpec(KineticRegime.mtf(beta), **VLASOV_SPEC)
        res = minimize(spec, VLASOV_GRID)
        assert res.converged, f"beta={beta}: no convergence"
        E = energy(spec, res.rho).total
        m = vlasov.bathtub_from_density(res.rho, "MTF", beta)
        closed = abs(vlasov.vlasov_energy(m, spec.V, spec.w).total - E) / abs(E)
        quad = abs(vlasov.vlasov_energy_quadrature(m, spec.V, spec.w).total - E) / abs(E)
        rt = float(np.max(np.abs(vlasov.vlasov_density(m).values - res.rho.values)))
        dt = time.perf_counter() - t0
        assert closed < 1e-9, f"beta={beta}: closed form {closed:.2e}"
        assert quad < 1e-7, f"beta={beta}: quadrature {quad:.2e}"
        assert rt < 1e-9, f"beta={beta}: round trip {rt:.2e}"
        assert dt < 30.0, f"beta={beta}: {dt:.1f}s"
        parts.append(f"b={beta:g}: {closed:.0e}/{quad:.0e}/{rt:.0e}")
    return "closed/quadrature/round-trip " + ", ".join(parts)


@criterion(7, "Phase-space counting identity", 2.0)
def c7():
    rng = np.random.default_rng(707)
    worst = 0.0
    for beta, nu in zip(10.0 ** rng.uniform(-2, 2, 1000), rng.uniform(0.01, 50, 1000)):
        a, b = vlasov.phase_count(beta, nu), vlasov.phase_count_enumerated(beta, nu)
        worst = max(worst, abs(a - b) / b)
    assert worst < 1e-12, f"identity rel {worst:.2e}"
    lattice_ok = 0
    for beta, nu in zip(10.0 ** rng.uniform(-1, 1, 50), rng.uniform(0.5, 20, 50)):
        dp = 1e-3
        nb = len(vlasov.band_shifts(beta, nu))
        err = abs(vlasov.phase_count_lattice(beta, nu, dp) - vlasov.phase_count_enumerated(beta, nu))
        assert err <= 2 * dp * nb, f"lattice count off by {err:.2e} at beta={beta:.3g}, nu={nu:.3g}"
        lattice_ok += 1
    return f"max rel {worst:.1e} on 1000 samples; lattice enumeration within 2 dp per band on {lattice_ok}"


HBARS = [0.08, 0.04, 0.02, 0.01]


@criterion(8, "Weyl asymptotics", 120.0)
def c8():
    template = OracleProblem.from_profile({"kind": "harmonic", "curvature": 1.0, "depth": 1.0}, half_length=1.0)
    parts = []
    for rule, value in (("fixed_hbar_b", 0.5), ("fixed_b", 1.0), ("fixed_b", 0.0)):
        res = weyl_sweep(template, HBARS, rule, value)
        dev = [abs(r.ratio - 1) for r in res]
        assert all(r.defined and r.resolved for r in res), f"{rule}={value}: undefined or under-resolved row"
        assert strictly_decreasing(res), f"{rule}={value}: deviations {dev}"
        assert dev[-1] < 0.05, f"{rule}={value}: final deviation {dev[-1]:.3g}"
        parts.append(f"{rule}={value:g} final {dev[-1]:.1e}")
    # B -> 0 limit of the pressure recovers the b = 0 constant
    lim = L.landau_pressure(1e-3, 1.0) / L.FREE_PRESSURE_COEFF - 1
    assert abs(lim) < 2e-3, f"P_(1e-3)(1) vs 2/15pi^2: {lim:.2e}"
    p0 = template.with_scale(0.02, 0.0)
    p_small = template.with_scale(0.02, 1e-3 / 0.02)
    gap = semiclassical_energy(p_small) / semiclassical_energy(p0) - 1
    assert abs(gap) < 2e-3, f"E_scl at hbar b=1e-3 vs b=0: {gap:.2e}"
    return "; ".join(parts) + f"; B->0 pressure {lim:.1e}, E_scl {gap:.1e}"


@criterion(9, "Free-gas degeneracy", 30.0)
def c9():
    parts = []
    for hbb in (0.1, 0.3):
        hb, W0, Lz = 0.05, 1.0, 50.0
        p = OracleProblem.from_profile({"kind": "constant", "value": -W0}, half_length=Lz, hbar=hb, b=hbb / hb,
                                       z_points=20000)
        q, _, ok, _ = quantum_sum(p)
        expect = -hb**-3 * L.landau_pressure(hbb, W0) * 2 * Lz * p.area
        rel = q / expect - 1
        assert ok, "under-resolved"
        assert abs(rel) < 0.02, f"hbar b={hbb}: rel {rel:.3e}"
        parts.append(f"hbar b={hbb:g}: {rel:.1e}")
    return ", ".join(parts)


@criterion(10, "beta-sweep interpolation", 600.0)
def c10():
    g = Grid3(2.5, 32)
    spec = FunctionalSpec(KineticRegime.tf(), **VLASOV_SPEC)
    cfg = MinimizerConfig()
    betas = list(np.logspace(-4, 4, 9))
    rows = beta_sweep(spec, g, cfg, betas)
    assert all(r.converged for r in rows), "a sweep row did not converge"
    tf = minimize(spec, g, cfg)
    stf = minimize(spec.with_regime(KineticRegime.stf()), g, cfg)
    assert tf.converged and stf.converged
    lo = rows[0].energy / tf.energy.total - 1
    hi = rows[-1].energy / stf.energy.total - 1
    assert abs(lo) < 5e-3, f"beta=1e-4 vs TF {lo:.2e}"
    assert abs(hi) < 5e-3, f"beta=1e4 vs STF {hi:.2e}"
    peak = betas[int(np.argmax([r.energy for r in rows]))]
    return f"E(1e-4)/E_TF-1={lo:.1e}, E(1e4)/E_STF-1={hi:.1e}; largest E at beta={peak:g}"


@criterion(11, "CLI determinism", 120.0)
def c11():
    import tempfile
    from pathlib import Path
    from mtf_lab.cli import run

    configs = {
        "pressure": {"B": [0.5, 1.0], "nu": {"start": 0, "stop": 5, "num": 11}, "spin": True},
        "tau": {"regimes": [{"kind": "TF"}, {"kind": "MTF", "beta": 2.0}], "t": [0.0, 0.1, 1.0]},
        "minimize": {"grid": {"extent": 2.0, "points": 16}, "regime": {"kind": "MTF", "beta": 1.0},
                     "potential": {"kind": "harmonic"}, "kernel": {"kind": "gaussian", "width": 0.5}},
        "vlasov-check": {"grid": {"extent": 2.0, "points": 8}, "potential": {"kind": "harmonic"},
                         "betas": [1.0], "spot_checks": 3},
        "weyl": {"profile": {"kind": "harmonic"}, "half_length": 1.0, "hbars": [0.08, 0.04],
                 "b_rule": "fixed_hbar_b", "value": 0.5, "per_band": True},
    }
    checked = 0
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp)
        for command, params in configs.items():
            conf = base / f"{command}.json"
            conf.write_text(json.dumps({"command": command, "parameters": params, "seed": 11}))
            outs = []
            for k in range(2):
                out = base / f"{command}-{k}"
                assert run([command, "--config", str(conf), "--out", str(out)]) == 0, f"{command} failed"
                outs.append(out)
            man = [json.loads((o / "manifest.json").read_text()) for o in outs]
            files = sorted(p.name for p in outs[0].iterdir() if p.name != "manifest.json")
            assert files == sorted(p.name for p in outs[1].iterdir() if p.name != "manifest.json")
            for name in files:
                assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), f"{command}/{name} differs"
                checked += 1
            assert [a["sha256"] for a in man[0]["artifacts"]] == [a["sha256"] for a in man[1]["artifacts"]]
            for m in man:
                m.pop("timings")
            assert man[0] == man[1], f"{command}: manifest differs beyond timings"
    return f"{checked} data files byte-identical across repeated runs of {len(configs)} commands"


CRITERIA = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11]


@pytest.mark.parametrize("fn", CRITERIA, ids=[f"criterion_{c.number:02d}" for c in CRITERIA])
def test_criterion(fn):
    fn()


if __name__ == "__main__":
    failed = 0
    for fn in CRITERIA:
        try:
            fn()
        except AssertionError:
            failed += 1
        print(summary_lines()[-1] if fn.number in RESULTS else f"criterion {fn.number}: FAIL", flush=True)
    sys.exit(1 if failed else 0)
