"""Phase-space (Vlasov) side: bathtub occupation measures and their energies.

A phase-space point is ``(u, p, j, s)``: position, momentum along the field,
Landau index and spin.  The minimizing occupations at fixed density are
indicators of sublevel sets, so a measure is stored as its level field on
the position grid and never as a 6-D array.

Regimes: ``MTF`` (``1{p^2 + k_beta (2j+1+s) <= r(x)}``), ``STF``
(``1{p^2 <= level(x)}``, one band, no spin) and ``WEAK`` (3-D momentum,
``1{|p + b A(x)|^2 <= level(x)}`` for both spins).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import landau
from .fields import (Convolver, DensityField, Grid3, InteractionKernel, Potential, integrate,
                     interaction_energy, potential_energy)
from .functionals import EnergyRecord
from .landau import C_TF, k_beta, pressure_prefactor

REGIMES = ("MTF", "STF", "WEAK")

# default number of Simpson intervals per band in the quadrature oracle
ORACLE_INTERVALS = 400


@dataclass(frozen=True)
class PhaseSpacePoint:
    u: tuple
    p: object  # float, or a 3-vector in the weak-field regime
    j: int = 0
    s: int = -1

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 0:
            raise ValueError("Landau index j must be a nonnegative integer")
        if self.s not in (-1, 1):
            raise ValueError("spin must be -1 or +1")
        if len(self.u) != 3:
            raise ValueError("u must be a point of R^3")


@dataclass
class BathtubMeasure:
    regime: str
    grid: Grid3
    level: np.ndarray
    beta: Optional[float] = None
    b: float = 0.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown phase-space regime {self.regime!r}")
        if self.regime == "MTF" and not (self.beta is not None and self.beta > 0):
            raise ValueError("MTF measure needs beta > 0")
        lv = np.asarray(self.level, dtype=float)
        if lv.shape != self.grid.shape:
            raise ValueError("level field does not match the grid")
        if not np.all(np.isfinite(lv)) or np.any(lv < 0):
            raise ValueError("level must be finite and nonnegative")
        self.level = lv

    @property
    def prefactor(self) -> float:
        """Weight turning phase-space volume into particle density."""
        if self.regime == "MTF":
            return self.beta / (1.0 + self.beta) / (2.0 * math.pi) ** 2
        if self.regime == "STF":
            return 1.0 / (2.0 * math.pi) ** 2
        return 1.0 / (2.0 * math.pi) ** 3

    def metadata(self) -> dict:
        d = {"regime": self.regime}
        if self.regime == "MTF":
            d["beta"] = self.beta
        if self.regime == "WEAK":
            d["b"] = self.b
        return d


def bathtub_from_density(rho: DensityField, regime: str, beta: Optional[float] = None,
                         b: float = 0.0) -> BathtubMeasure:
    t = rho.total()
    if regime == "MTF":
        level = np.asarray(landau.r_of_rho(beta, t))
    elif regime == "STF":
        level = 4.0 * math.pi**4 * t**2
    elif regime == "WEAK":
        level = C_TF * t ** (2.0 / 3.0)
    else:
        raise ValueError(f"unknown phase-space regime {regime!r}")
    return BathtubMeasure(regime, rho.grid, level, beta=beta, b=b)


# ---------------------------------------------------------------------------
# band bookkeeping


def band_shifts(beta: float, nu_max: float) -> list:
    """All ``(j, s, k_beta (2j+1+s))`` with shift ``<= nu_max``, enumerated explicitly."""
    kb = k_beta(beta)
    out = []
    j = 0
    while kb * 2 * j <= nu_max:
        for s in (-1, 1):
            e = kb * (2 * j + 1 + s)
            if e <= nu_max:
                out.append((j, s, e))
        j += 1
    return out


def phase_count(beta: float, nu) -> np.ndarray:
    """Measure of ``{(p, j, s): p^2 + k_beta (2j+1+s) <= nu}`` from the pressure identity."""
    nu_arr = np.asarray(nu, dtype=float)
    if np.any(nu_arr < 0) or not np.all(np.isfinite(nu_arr)):
        raise ValueError("nu must be finite and >= 0")
    kb = k_beta(beta)
    out = (2.0 * math.pi) ** 2 / kb * np.asarray(landau.landau_pressure_derivative(kb, nu_arr))
    return out if np.ndim(nu) else float(out)


def phase_count_enumerated(beta: float, nu: float) -> float:
    """Same measure by listing every band and adding interval lengths."""
    if nu < 0:
        raise ValueError("nu must be >= 0")
    return float(sum(2.0 * math.sqrt(nu - e) for _, _, e in band_shifts(beta, nu)))


def phase_count_lattice(beta: float, nu: float, dp: float) -> float:
    """Crude count of momentum lattice points ``(i + 1/2) dp`` inside each band."""
    total = 0.0
    for _, _, e in band_shifts(beta, nu):
        half = math.sqrt(nu - e)
        n = int(np.count_nonzero((np.arange(int(half / dp) + 2) + 0.5) * dp <= half))
        total += 2 * n * dp
    return total


# ---------------------------------------------------------------------------
# closed-form density and kinetic energy


def vlasov_density(m: BathtubMeasure) -> DensityField:
    lv = m.level
    if m.regime == "MTF":
        # prefactor * phase_count(level) collapses to the scaled P'
        vals = pressure_prefactor(m.beta) * np.asarray(landau.landau_pressure_derivative(k_beta(m.beta), lv))
    elif m.regime == "STF":
        vals = m.prefactor * 2.0 * np.sqrt(lv)
    else:
        vals = m.prefactor * 2.0 * (4.0 * math.pi / 3.0) * lv**1.5
    return DensityField(m.grid, vals)


def kinetic_density(m: BathtubMeasure) -> np.ndarray:
    lv = m.level
    if m.regime == "MTF":
        kb = k_beta(m.beta)
        dP = np.asarray(landau.landau_pressure_derivative(kb, lv))
        P = np.asarray(landau.landau_pressure(kb, lv))
        return pressure_prefactor(m.beta) * (dP * lv - P)
    if m.regime == "STF":
        return m.prefactor * (2.0 / 3.0) * lv**1.5
    # int_{|q|^2 <= L} |q|^2 dq = 4 pi L^(5/2) / 5, times two spins
    return m.prefactor * 2.0 * (4.0 * math.pi / 5.0) * lv**2.5


def vlasov_kinetic(m: BathtubMeasure) -> float:
    return integrate(m.grid, kinetic_density(m))


def vlasov_energy(m: BathtubMeasure, V: Potential, w: InteractionKernel,
                  convolver: Optional[Convolver] = None) -> EnergyRecord:
    rho = vlasov_density(m)
    return EnergyRecord(vlasov_kinetic(m), potential_energy(V, rho),
                        interaction_energy(w, rho, convolver), rho.mass())


# ---------------------------------------------------------------------------
# quadrature oracle


def _simpson_weights(n: int) -> np.ndarray:
    if n % 2:
        raise ValueError("Simpson rule needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def quadrature_moments(m: BathtubMeasure, intervals: int = ORACLE_INTERVALS) -> tuple:
    """Per-cell density and kinetic density by explicit momentum quadrature.

    MTF: every band ``(j, s)`` below the largest level is listed; on each,
    the occupied momenta form ``[-p_max, p_max]`` with
    ``p_max = sqrt(r(x) - shift)`` and the integrals of ``1`` and of
    ``p^2 + shift`` are done by composite Simpson on that interval.  STF is
    the single band with zero shift.  WEAK integrates ``|q|^2`` over the
    ball in spherical shells (the ``b A(x)`` shift drops out after the
    substitution ``q = p + b A(x)``).
    """
    lv = m.level.reshape(-1)
    wts = _simpson_weights(intervals)
    grid01 = np.linspace(-1.0, 1.0, intervals + 1)
    dens = np.zeros_like(lv)
    kin = np.zeros_like(lv)
    if m.regime in ("MTF", "STF"):
        bands = band_shifts(m.beta, float(lv.max())) if m.regime == "MTF" else [(0, -1, 0.0)]
        for _, _, e in bands:
            pmax = np.sqrt(np.maximum(lv - e, 0.0))
            active = pmax > 0
            if not np.any(active):
                continue
            pm = pmax[active]
            p = pm[:, None] * grid01[None, :]
            h = pm / (intervals / 2.0)
            dens[active] += h * (np.ones_like(p) @ wts)
            kin[active] += h * ((p**2 + e) @ wts)
    else:
        # radial shells: int_0^R 4 pi q^2 (1, q^2) dq, two spins
        q01 = np.linspace(0.0, 1.0, intervals + 1)
        R = np.sqrt(lv)
        q = R[:, None] * q01[None, :]
        h = R / intervals
        shell = 4.0 * math.pi * q**2
        dens = 2.0 * h * (shell @ wts)
        kin = 2.0 * h * ((shell * q**2) @ wts)
    pref = m.prefactor
    return (pref * dens).reshape(m.grid.shape), (pref * kin).reshape(m.grid.shape)


def vlasov_energy_quadrature(m: BathtubMeasure, V: Potential, w: InteractionKernel,
                             intervals: int = ORACLE_INTERVALS) -> EnergyRecord:
    dens, kin = quadrature_moments(m, intervals)
    rho = DensityField(m.grid, dens)
    return EnergyRecord(integrate(m.grid, kin), potential_energy(V, rho),
                        interaction_energy(w, rho), rho.mass())


# ---------------------------------------------------------------------------
# pointwise occupation


def vector_potential(u) -> np.ndarray:
    """Symmetric gauge for a unit field along the third axis."""
    u = np.asarray(u, dtype=float)
    return 0.5 * np.array([-u[1], u[0], 0.0])


def occupation(m: BathtubMeasure, cell: tuple, point: PhaseSpacePoint) -> int:
    """Value of the indicator ``m(u, p, j, s)`` with ``u`` in grid cell ``cell``."""
    lv = float(m.level[cell])
    if m.regime == "MTF":
        e = k_beta(m.beta) * (2 * point.j + 1 + point.s)
        return int(float(point.p) ** 2 + e <= lv)
    if m.regime == "STF":
        return int(float(point.p) ** 2 <= lv)
    # spin does not enter the weak-field indicator
    q = np.asarray(point.p, dtype=float) + m.b * vector_potential(point.u)
    return int(float(q @ q) <= lv)


# ---------------------------------------------------------------------------
# discretized bathtub spot check


@dataclass
class LatticeCell:
    """One position cell: phase-space lattice ``(p_i, j, s)`` with energies and the bathtub occupation."""
    energies: np.ndarray
    weight: float
    occupation: np.ndarray

    def mass(self, occ=None) -> float:
        occ = self.occupation if occ is None else occ
        return float(occ.sum() * self.weight)

    def kinetic(self, occ=None) -> float:
        occ = self.occupation if occ is None else occ
        return float((occ * self.energies).sum() * self.weight)


def lattice_cell(beta: float, level: float, n_p: int = 64, p_span: Optional[float] = None,
                 extra_bands: int = 2) -> LatticeCell:
    span = p_span if p_span is not None else 1.5 * math.sqrt(max(level, 1e-12))
    dp = 2.0 * span / n_p
    p = -span + dp * (np.arange(n_p) + 0.5)
    kb = k_beta(beta)
    jmax = int(level / (2.0 * kb)) + extra_bands
    e = [p**2 + kb * (2 * j + 1 + s) for j in range(jmax + 1) for s in (-1, 1)]
    energies = np.concatenate(e)
    return LatticeCell(energies, dp, (energies <= level).astype(float))


def bathtub_spot_check(cell: LatticeCell, rng: np.random.Generator, trials: int = 1000) -> float:
    """Smallest ``kinetic(m') - kinetic(m)`` over random competitors of equal mass.

    Competitors are random rearrangements of the bathtub occupation and
    random fractional occupations ``0 <= m' <= 1`` rescaled to the same
    mass.  A nonnegative return value means no competitor beat the bathtub.
    """
    base = cell.kinetic()
    target = cell.occupation.sum()
    worst = math.inf
    for t in range(trials):
        if t % 2 == 0:
            occ = rng.permutation(cell.occupation)
        else:
            occ = rng.random(cell.energies.size)
            # rescale into [0, 1] with the same total
            occ *= target / occ.sum()
            while occ.max() > 1.0:
                excess = np.maximum(occ - 1.0, 0.0).sum()
                occ = np.minimum(occ, 1.0)
                free = occ < 1.0
                occ[free] += excess * occ[free] / occ[free].sum()
        worst = min(worst, cell.kinetic(occ) - base)
    return worst
