"""Weyl-asymptotics check for the Pauli operator with a separable potential.

With ``V(x) = v(x_3)`` constant across a cross-section of area ``A`` and a
constant field along ``x_3``, the Pauli operator splits into exact Landau
bands (shift ``hbar b (2j+1+s)``, degeneracy ``b / (2 pi hbar)`` per unit
area) times the 1-D operator ``-hbar^2 d^2/dz^2 + v`` with Dirichlet ends.
One tridiagonal diagonalization per ``hbar`` serves every band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .landau import FREE_PRESSURE_COEFF, landau_pressure

MIN_POINTS = 64
MIN_POINTS_PER_WAVELENGTH = 8
DEFAULT_POINTS_PER_WAVELENGTH = 400


class UnderResolved(UserWarning):
    pass


_SUBCELLS = 16


def subsampled_average(v: Callable) -> Callable:
    """Cell average of ``v`` over ``[z - h/2, z + h/2]`` by a 16-point midpoint rule."""
    def avg(z, h):
        off = h * ((np.arange(_SUBCELLS) + 0.5) / _SUBCELLS - 0.5)
        return np.mean(v(np.asarray(z)[:, None] + off[None, :]), axis=1)
    return avg


def _profile(spec) -> tuple:
    """``(v, cell_average)`` from a small description dict (used by the CLI)."""
    kind = spec["kind"]
    if kind == "harmonic":
        c, depth = float(spec.get("curvature", 1.0)), float(spec.get("depth", 1.0))
        return (lambda z: c * np.asarray(z) ** 2 - depth,
                lambda z, h: c * (np.asarray(z) ** 2 + h * h / 12.0) - depth)
    if kind == "constant":
        val = float(spec["value"])
        f = lambda z: np.full(np.shape(z), val)
        return f, lambda z, h: f(z)
    if kind == "square_well":
        depth, a = float(spec["depth"]), float(spec["half_width"])

        def avg(z, h):
            z = np.asarray(z)
            inside = np.clip(np.minimum(z + 0.5 * h, a) - np.maximum(z - 0.5 * h, -a), 0.0, None)
            return -depth * inside / h
        return (lambda z: np.where(np.abs(z) < a, -depth, 0.0)), avg
    if kind == "table":
        zt, vt = np.asarray(spec["z"], dtype=float), np.asarray(spec["v"], dtype=float)
        if zt.ndim != 1 or zt.shape != vt.shape or np.any(np.diff(zt) <= 0):
            raise ValueError("profile table needs increasing z and matching v")
        f = lambda z: np.interp(z, zt, vt)
        return f, subsampled_average(f)
    raise ValueError(f"unknown profile kind {kind!r}")


@dataclass(frozen=True)
class OracleProblem:
    v: Callable
    half_length: float
    area: float = 1.0
    hbar: float = 0.1
    b: float = 0.0
    z_points: Optional[int] = None  # None: chosen from the local wavelength
    description: dict = field(default_factory=dict, compare=False)
    # (z, h) -> mean of v over [z - h/2, z + h/2]; None means subsample v
    cell_average: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.half_length > 0 or not self.area > 0 or not self.hbar > 0:
            raise ValueError("half_length, area and hbar must be positive")
        if not (math.isfinite(self.b) and self.b >= 0):
            raise ValueError("b must be finite and >= 0")
        if self.z_points is not None and self.z_points < MIN_POINTS:
            raise ValueError(f"z_points must be at least {MIN_POINTS}")

    @classmethod
    def from_profile(cls, profile: dict, **kw) -> "OracleProblem":
        v, avg = _profile(profile)
        return cls(v, description=dict(profile), cell_average=avg, **kw)

    def with_scale(self, hbar: float, b: float) -> "OracleProblem":
        return OracleProblem(self.v, self.half_length, self.area, hbar, b, self.z_points,
                             self.description, self.cell_average)

    def sampled(self, z: np.ndarray, h: float) -> np.ndarray:
        avg = self.cell_average or subsampled_average(self.v)
        return np.asarray(avg(z, h), dtype=float)

    @property
    def hbar_b(self) -> float:
        return self.hbar * self.b

    def depth(self) -> float:
        """``max v_-`` sampled finely on the interval."""
        z = np.linspace(-self.half_length, self.half_length, 20001)
        return float(max(0.0, -np.min(self.v(z))))

    def points(self) -> int:
        if self.z_points is not None:
            return int(self.z_points)
        d = self.depth()
        if d == 0:
            return MIN_POINTS
        lam = 2.0 * math.pi * self.hbar / math.sqrt(d)
        return max(MIN_POINTS, int(math.ceil(2.0 * self.half_length / lam * DEFAULT_POINTS_PER_WAVELENGTH)))

    def nodes(self, n: Optional[int] = None) -> tuple:
        """Interior Dirichlet nodes and their spacing."""
        n = self.points() if n is None else n
        h = 2.0 * self.half_length / (n + 1)
        return -self.half_length + h * np.arange(1, n + 1), h


def negative_spectrum(problem: OracleProblem, n: Optional[int] = None) -> tuple:
    """Ascending negative eigenvalues of ``-hbar^2 d^2/dz^2 + v`` and a resolution flag.

    Three-point differences with Dirichlet ends; each node carries the cell
    average of ``v``, which keeps second-order accuracy across jumps.
    """
    z, h = problem.nodes(n)
    vz = problem.sampled(z, h)
    if not np.all(np.isfinite(vz)):
        raise ValueError("potential must be finite on the grid")
    c = problem.hbar**2 / h**2
    d = 2.0 * c + vz
    e = np.full(z.size - 1, -c)
    if d.min() - 2.0 * c >= 0:
        vals = np.empty(0)
    else:
        vals = eigvalsh_tridiagonal(d, e, select="v", select_range=(-np.inf, 0.0))
        vals = np.sort(vals[vals < 0])
    depth = max(0.0, -float(vz.min()))
    ok = True
    if depth > 0:
        lam = 2.0 * math.pi * problem.hbar / math.sqrt(depth)
        ok = lam / h >= MIN_POINTS_PER_WAVELENGTH
    return vals, ok


def band_negative_sum(eigs: np.ndarray, shift: float) -> float:
    """``sum_k (e_k + shift)_-`` (nonpositive), accumulated in ascending order."""
    if shift < 0:
        raise ValueError("shift must be >= 0")
    vals = eigs[eigs + shift < 0] + shift
    return float(np.sum(vals)) if vals.size else 0.0


def band_negative_sum_for(v: Callable, half_length: float, hbar: float, shift: float,
                          z_points: int) -> float:
    """Stand-alone form: diagonalize and sum for one shift."""
    eigs, _ = negative_spectrum(OracleProblem(v, half_length, 1.0, hbar, 0.0, z_points))
    return band_negative_sum(eigs, shift)


@dataclass
class OracleResult:
    hbar: float
    b: float
    quantum_sum: float
    semiclassical: float
    ratio: float
    defined: bool
    resolved: bool
    z_points: int
    per_band: dict = field(default_factory=dict)  # (j, s) -> contribution

    def row(self) -> tuple:
        return (self.hbar, self.b, self.quantum_sum, self.semiclassical, self.ratio)

    def per_band_json(self) -> list:
        return [{"j": j, "s": s, "contribution": c} for (j, s), c in sorted(self.per_band.items())]


def quantum_sum(problem: OracleProblem, n: Optional[int] = None) -> tuple:
    """Sum of negative Pauli eigenvalues.  Returns ``(total, per_band, resolved, n)``."""
    n = problem.points() if n is None else n
    eigs, ok = negative_spectrum(problem, n)
    if not ok:
        warnings.warn(f"hbar={problem.hbar:g}: fewer than {MIN_POINTS_PER_WAVELENGTH} points per "
                      "wavelength", UnderResolved, stacklevel=2)
    if eigs.size == 0:
        return 0.0, {}, ok, n
    A, hb = problem.area, problem.hbar
    if problem.b == 0:
        # transverse continuum, two spins: A/(2 pi hbar)^2 * 2 * int d^2p (e + p^2)_-
        return float(-A / (4.0 * math.pi * hb**2) * np.sum(eigs**2)), {}, ok, n
    hbb = problem.hbar_b
    deg = A * problem.b / (2.0 * math.pi * hb)
    depth = -float(eigs[0])
    cache = {}
    per_band = {}
    for s in (-1, 1):
        j = 0
        while True:
            k = 2 * j + 1 + s
            shift = hbb * k
            if shift >= depth:
                break
            if k not in cache:
                cache[k] = deg * band_negative_sum(eigs, shift)
            per_band[(j, s)] = cache[k]
            j += 1
    total = float(sum(per_band[key] for key in sorted(per_band, key=lambda t: (2 * t[0] + 1 + t[1], t[1]))))
    return total, per_band, ok, n


def semiclassical_energy(problem: OracleProblem, n: Optional[int] = None) -> float:
    """``-hbar^-3 A int P_{hbar b}(v_-(z)) dz`` by the midpoint rule on ``n`` cells."""
    n = problem.points() if n is None else n
    L = problem.half_length
    h = 2.0 * L / n
    z = -L + h * (np.arange(n) + 0.5)
    vm = np.maximum(-np.asarray(problem.v(z), dtype=float), 0.0)
    if problem.b == 0:
        P = FREE_PRESSURE_COEFF * vm**2.5
    else:
        P = np.asarray(landau_pressure(problem.hbar_b, vm))
    return float(-problem.area / problem.hbar**3 * np.sum(P) * h)


def weyl_ratio(problem: OracleProblem, n: Optional[int] = None) -> OracleResult:
    n = problem.points() if n is None else n
    q, per_band, ok, n = quantum_sum(problem, n)
    e = semiclassical_energy(problem, n)
    defined = e != 0
    ratio = q / e if defined else float("nan")
    return OracleResult(problem.hbar, problem.b, q, e, ratio, defined, ok, n, per_band)


def weyl_sweep(template: OracleProblem, hbars: Sequence[float], b_rule: str = "fixed_hbar_b",
               value: float = 0.5, n: Optional[int] = None) -> list:
    """``weyl_ratio`` along ``hbars`` with ``b = value`` (``fixed_b``) or ``b = value / hbar`` (``fixed_hbar_b``)."""
    out = []
    for hb in hbars:
        if b_rule == "fixed_b":
            b = value
        elif b_rule == "fixed_hbar_b":
            b = value / hb
        else:
            raise ValueError(f"unknown b_rule {b_rule!r}")
        out.append(weyl_ratio(template.with_scale(hb, b), n))
    return out


def deviations_decrease(results: Sequence[OracleResult], jitter: float = 0.1) -> bool:
    """``|ratio - 1|`` nonincreasing after the first entry, each step allowed to grow by ``jitter``."""
    dev = [abs(r.ratio - 1.0) for r in results]
    return all(dev[i + 1] <= (1.0 + jitter) * dev[i] for i in range(1, len(dev) - 1)) and dev[-1] < dev[0]


def strictly_decreasing(results: Sequence[OracleResult]) -> bool:
    dev = [abs(r.ratio - 1.0) for r in results]
    return all(b < a for a, b in zip(dev, dev[1:]))
