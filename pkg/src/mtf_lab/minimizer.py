"""Ground states of the Thomas-Fermi type functionals by self-consistent
chemical-potential iteration.

Each step freezes the mean-field potential ``Phi = V + w * rho``, finds the
chemical potential ``mu`` for which the Euler-Lagrange density
``inverse_tau_prime(mu - Phi)`` has unit mass, and mixes that density into
the current iterate.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .fields import Convolver, DensityField, Grid3, gaussian_density, integrate
from .functionals import EnergyRecord, FunctionalSpec, energy
from .landau import KineticRegime, inverse_tau_prime, tau_prime

log = logging.getLogger(__name__)


class BracketFailure(RuntimeError):
    """The configured chemical-potential interval does not bracket unit mass."""


class NotConverged(RuntimeError):
    def __init__(self, result: "MinimizerResult"):
        super().__init__(f"no convergence after {result.iterations} iterations")
        self.result = result


@dataclass(frozen=True)
class MinimizerConfig:
    mixing: float = 0.3
    max_iter: int = 500
    tol_density: Optional[float] = None  # None: 1e-8 times the box volume
    tol_mass: float = 1e-10
    mu_bracket: Optional[tuple] = None

    def __post_init__(self):
        if not 0.0 < self.mixing <= 1.0:
            raise ValueError("mixing must lie in (0, 1]")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if self.tol_density is not None and not self.tol_density > 0:
            raise ValueError("tol_density must be positive")
        if not self.tol_mass > 0:
            raise ValueError("tol_mass must be positive")
        if self.mu_bracket is not None:
            lo, hi = self.mu_bracket
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError("mu_bracket must be a finite interval (lo, hi) with lo < hi")

    def density_tolerance(self, grid: Grid3) -> float:
        return self.tol_density if self.tol_density is not None else 1e-8 * grid.volume


@dataclass
class MinimizerResult:
    rho: DensityField
    energy: EnergyRecord
    mu: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)  # (energy, L1 change) per iteration
    regime: Optional[KineticRegime] = None
    residual: float = float("nan")
    seconds: float = 0.0

    def summary(self) -> dict:
        return {
            "beta": None if self.regime is None or self.regime.tag != "MTF" else self.regime.beta,
            "regime": None if self.regime is None else self.regime.label,
            "energy": self.energy.to_dict(),
            "mu": self.mu,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
        }


def _mass(grid: Grid3, values: np.ndarray) -> float:
    return integrate(grid, values)


def solve_mu(regime: KineticRegime, phi: np.ndarray, grid: Grid3, tol_mass: float,
             bracket: Optional[tuple] = None) -> tuple:
    """Chemical potential giving unit mass for the frozen potential ``phi``.

    Bisection runs until the interval cannot shrink further; of the two final
    endpoints the one with the smaller mass defect is kept, ties going to the
    smaller ``mu``.  The search variable is ``mu - min(phi)``, so adding a
    constant to ``phi`` shifts the answer by that constant.
    """
    base = float(phi.min())
    rel = phi - base

    def mass_at(m):
        return _mass(grid, inverse_tau_prime(regime, m - rel))

    if bracket is None:
        lo, hi = 0.0, 1.0
        m_hi = mass_at(hi)
        steps = 0
        while m_hi < 1.0:
            lo, hi = hi, 2.0 * hi
            m_hi = mass_at(hi)
            steps += 1
            if steps > 200:
                raise BracketFailure("could not bracket unit mass")
    else:
        lo, hi = bracket[0] - base, bracket[1] - base
        if mass_at(lo) > 1.0 or mass_at(hi) < 1.0:
            raise BracketFailure(f"mu_bracket {tuple(bracket)} does not bracket unit mass")
    m_lo, m_hi = mass_at(lo), mass_at(hi)
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        m = mass_at(mid)
        if m >= 1.0:
            hi, m_hi = mid, m
        else:
            lo, m_lo = mid, m
    mu_rel, m = (lo, m_lo) if abs(m_lo - 1.0) <= abs(m_hi - 1.0) else (hi, m_hi)
    if abs(m - 1.0) >= tol_mass:
        raise BracketFailure(f"unit mass not reachable to {tol_mass:g} (closest {m!r})")
    rho = inverse_tau_prime(regime, mu_rel - rel)
    return base + mu_rel, np.asarray(rho, dtype=float)


def euler_lagrange_residual(regime: KineticRegime, rho: np.ndarray, phi: np.ndarray, mu: float) -> float:
    """``max |tau'(rho) + Phi - mu|`` over occupied cells (those with ``mu > Phi``)."""
    occ = mu > phi
    if not np.any(occ):
        return 0.0
    tp = np.asarray(tau_prime(regime, rho[occ]))
    return float(np.max(np.abs(tp + phi[occ] - mu)))


def _initial(spec: FunctionalSpec, grid: Grid3, rho0: Optional[DensityField]) -> np.ndarray:
    if rho0 is None:
        return gaussian_density(grid).values
    if rho0.grid != grid:
        raise ValueError("initial density lives on a different grid")
    return rho0.normalized().total()


def minimize(spec: FunctionalSpec, grid: Grid3, config: MinimizerConfig = MinimizerConfig(), *,
             rho0: Optional[DensityField] = None, raise_on_failure: bool = False) -> MinimizerResult:
    """Minimize the spin-summed functional ``spec`` over unit-mass densities on ``grid``.

    The reported density is the lowest-energy one among the iterates and the
    final Euler-Lagrange image (the unmixed density of the last potential).
    """
    if spec.spin_resolved:
        raise ValueError("the minimizer works with spin-summed functionals")
    t0 = time.perf_counter()
    regime = spec.regime
    V = spec.V.on(grid)
    conv = Convolver(spec.w, grid)
    tol = config.density_tolerance(grid)
    theta = config.mixing

    def phi_of(values):
        return V if spec.w.is_none else V + conv(values)

    def evaluate(values):
        return energy(spec, DensityField(grid, values), convolver=conv, potential=V)

    rho = _initial(spec, grid, rho0)
    best = None  # (total, values, record, mu, phi)
    history = []
    converged = False
    it = 0
    mu = float("nan")
    for it in range(1, config.max_iter + 1):
        phi = phi_of(rho)
        mu, image = solve_mu(regime, phi, grid, config.tol_mass, config.mu_bracket)
        rec = evaluate(rho)
        change = theta * integrate(grid, np.abs(image - rho))
        history.append((rec.total, change))
        if best is None or rec.total < best[0]:
            best = (rec.total, rho, rec, mu, phi)
        if change < tol:
            # final Euler-Lagrange image competes with the iterates
            rec_img = evaluate(image)
            if rec_img.total <= best[0]:
                best = (rec_img.total, image, rec_img, mu, phi)
            converged = True
            break
        rho = (1.0 - theta) * rho + theta * image

    _, values, rec, mu_best, phi_best = best
    # report mu consistent with the reported density's own potential
    phi_final = phi_of(values)
    if phi_final is not phi_best:
        mu_best, _ = solve_mu(regime, phi_final, grid, config.tol_mass, config.mu_bracket)
    residual = euler_lagrange_residual(regime, values, phi_final, mu_best)
    converged = converged and abs(rec.mass - 1.0) < config.tol_mass
    result = MinimizerResult(DensityField(grid, values), rec, mu_best, it, converged, history,
                             regime, residual, time.perf_counter() - t0)
    if not converged:
        if raise_on_failure:
            raise NotConverged(result)
        warnings.warn(f"{regime.label}: no convergence after {it} iterations; returning best iterate",
                      RuntimeWarning, stacklevel=2)
    log.info("%s: E=%.12g mu=%.12g iterations=%d converged=%s", regime.label, rec.total, mu_best, it, converged)
    return result


@dataclass
class SweepRow:
    beta: float
    energy: float
    mu: float
    iterations: int
    converged: bool
    result: MinimizerResult = field(repr=False)


def beta_sweep(spec: FunctionalSpec, grid: Grid3, config: MinimizerConfig, betas: Sequence[float],
               threads: int = 1) -> list:
    """``E^MTF(beta)`` for each ``beta``; ``spec`` supplies ``V`` and ``w``."""
    betas = [float(b) for b in betas]
    if any(not b > 0 for b in betas):
        raise ValueError("betas must be positive")
    if betas != sorted(betas):
        raise ValueError("betas must be sorted")

    def run(beta):
        res = minimize(spec.with_regime(KineticRegime.mtf(beta)), grid, config)
        return SweepRow(beta, res.energy.total, res.mu, res.iterations, res.converged, res)

    if threads > 1 and len(betas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, betas))
    return [run(b) for b in betas]
