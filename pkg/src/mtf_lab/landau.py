"""Landau-gas thermodynamics, Legendre transforms and the (N, beta) scaling.

Everything here is a pure function of its arguments.  Functions taking a
density/chemical-potential argument accept scalars or numpy arrays and
return the same shape.  The Landau sums, :func:`r_of_rho` and
:func:`tau_mtf` also broadcast over arrays of field strengths or ``beta``.

The Landau series are finite: the band ``j`` contributes only while
``2 j B < nu``.  Short sums are evaluated term by term.  Long ones (weak
fields, ``nu / 2B`` in the thousands) keep the first ``_DIRECT_TERMS``
terms and replace the rest by an Euler-Maclaurin expansion whose remainder
is below double precision, so there is no cutoff parameter either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import bernoulli

ArrayLike = Union[float, np.ndarray]

C_TF = (3.0 * math.pi**2) ** (2.0 / 3.0)
STF_COEFF = 4.0 * math.pi**4 / 3.0
FREE_PRESSURE_COEFF = 2.0 / (15.0 * math.pi**2)

_DIRECT_TERMS = 16
_EM_ORDERS = 6
_BERNOULLI = bernoulli(2 * _EM_ORDERS)


class BisectionError(RuntimeError):
    """A monotone root bracket could not be established."""


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class FieldScaling:
    """The semiclassical parameter and field strength attached to (N, beta)."""

    N: int
    beta: float
    hbar: float = field(init=False)
    b: float = field(init=False)
    k_beta: float = field(init=False)

    def __post_init__(self):
        N, beta = self.N, self.beta
        if isinstance(N, bool) or int(N) != N or N < 1:
            raise ValueError(f"N must be a positive integer, got {N!r}")
        if not math.isfinite(beta) or beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {beta!r}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "beta", float(beta))
        object.__setattr__(self, "hbar", N ** (-1.0 / 3.0) * (1.0 + beta) ** 0.2)
        object.__setattr__(self, "b", N ** (1.0 / 3.0) * beta * (1.0 + beta) ** -0.6)
        object.__setattr__(self, "k_beta", k_beta(beta))


def scaling_from(N: int, beta: float) -> FieldScaling:
    return FieldScaling(N, beta)


def k_beta(beta: float) -> float:
    """Scaled half band gap ``beta (1+beta)^(-2/5)``."""
    return beta * (1.0 + beta) ** -0.4


def pressure_prefactor(beta: float) -> float:
    return (1.0 + beta) ** -0.6


# ---------------------------------------------------------------------------
# kinetic regimes


@dataclass(frozen=True)
class KineticRegime:
    """Which kinetic energy density applies: ``MTF`` (with beta), ``TF`` or ``STF``."""

    tag: str
    beta: float | None = None

    def __post_init__(self):
        tag = self.tag.upper()
        object.__setattr__(self, "tag", tag)
        if tag == "MTF":
            if self.beta is None or not math.isfinite(self.beta) or self.beta <= 0:
                raise ValueError("MTF regime requires a finite beta > 0")
            object.__setattr__(self, "beta", float(self.beta))
        elif tag in ("TF", "STF"):
            if self.beta is not None:
                raise ValueError(f"{tag} regime takes no beta")
        else:
            raise ValueError(f"unknown kinetic regime {self.tag!r}")

    @classmethod
    def mtf(cls, beta: float) -> "KineticRegime":
        return cls("MTF", beta)

    @classmethod
    def tf(cls) -> "KineticRegime":
        return cls("TF")

    @classmethod
    def stf(cls) -> "KineticRegime":
        return cls("STF")

    @property
    def label(self) -> str:
        return f"MTF({self.beta:g})" if self.tag == "MTF" else self.tag


# ---------------------------------------------------------------------------
# Landau sums


def _check_field(B: ArrayLike) -> ArrayLike:
    arr = np.asarray(B, dtype=float)
    if not np.all(np.isfinite(arr) & (arr > 0)):
        raise ValueError(f"field strength must be > 0, got {B!r}")
    return float(arr) if arr.ndim == 0 else arr


def _check_nonneg(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be finite and >= 0")
    return arr


def _wrap(out: np.ndarray, *like) -> ArrayLike:
    return float(out) if all(np.ndim(x) == 0 for x in like) else out


def _power_coeff(p: float, m: int) -> float:
    c = 1.0
    for i in range(m):
        c *= p - i
    return c


def _shifted_power_sum(frac: np.ndarray, count: np.ndarray, p: float) -> np.ndarray:
    """``sum_{i=0}^{count-1} (frac + i)^p`` elementwise, ``0 <= frac < 1``."""
    out = np.zeros_like(frac)
    if out.size == 0:
        return out
    nmax = int(count.max())
    for i in range(min(nmax, _DIRECT_TERMS)):
        out += np.where(count > i, (frac + i) ** p, 0.0)
    long = count > _DIRECT_TERMS
    if np.any(long):
        f = frac[long]
        lo = f + _DIRECT_TERMS
        hi = f + (count[long] - 1)
        tail = (hi ** (p + 1) - lo ** (p + 1)) / (p + 1) + 0.5 * (hi**p + lo**p)
        for k in range(1, _EM_ORDERS + 1):
            m = 2 * k - 1
            c = _BERNOULLI[2 * k] / math.factorial(2 * k) * _power_coeff(p, m)
            tail += c * (hi ** (p - m) - lo ** (p - m))
        out[long] += tail
    return out


def landau_tail(B: float, nu: ArrayLike, p: float) -> ArrayLike:
    """``sum_{j>=1} [2jB - nu]_-^p``, the excited-band part of the Landau series."""
    B_in = B
    B = _check_field(B)
    nu_arr = _check_nonneg(nu, "nu")
    B_arr, nu_b = np.broadcast_arrays(np.asarray(B, dtype=float), nu_arr)
    x = np.atleast_1d(nu_b / (2.0 * B_arr)).astype(float).reshape(-1)
    count = np.floor(x)
    frac = x - count
    out = (2.0 * B_arr.reshape(-1)) ** p * _shifted_power_sum(frac, count.astype(np.int64), p)
    return _wrap(out.reshape(nu_b.shape), nu, B_in)


def landau_pressure(B: float, nu: ArrayLike) -> ArrayLike:
    """Pressure of the free Landau gas at field ``B`` and chemical potential ``nu``."""
    B = _check_field(B)
    nu_arr = _check_nonneg(nu, "nu")
    out = B / (3.0 * math.pi**2) * (nu_arr**1.5 + 2.0 * np.asarray(landau_tail(B, nu_arr, 1.5)))
    return _wrap(out, nu, B)


def landau_pressure_derivative(B: float, nu: ArrayLike) -> ArrayLike:
    B = _check_field(B)
    nu_arr = _check_nonneg(nu, "nu")
    out = B / (2.0 * math.pi**2) * (nu_arr**0.5 + 2.0 * np.asarray(landau_tail(B, nu_arr, 0.5)))
    return _wrap(out, nu, B)


def _check_spin(s: int) -> int:
    if s not in (-1, 1):
        raise ValueError(f"spin must be -1 or +1, got {s!r}")
    return s


def spin_pressure(B: float, nu: ArrayLike, s: int) -> ArrayLike:
    """Fully spin-polarized Landau pressure; the two spins sum to :func:`landau_pressure`."""
    B = _check_field(B)
    s = _check_spin(s)
    nu_arr = _check_nonneg(nu, "nu")
    tail = np.asarray(landau_tail(B, nu_arr, 1.5))
    out = B / (3.0 * math.pi**2) * (tail if s == 1 else nu_arr**1.5 + tail)
    return _wrap(out, nu, B)


def spin_pressure_derivative(B: float, nu: ArrayLike, s: int) -> ArrayLike:
    B = _check_field(B)
    s = _check_spin(s)
    nu_arr = _check_nonneg(nu, "nu")
    tail = np.asarray(landau_tail(B, nu_arr, 0.5))
    out = B / (2.0 * math.pi**2) * (tail if s == 1 else nu_arr**0.5 + tail)
    return _wrap(out, nu, B)


def free_pressure(nu: ArrayLike) -> ArrayLike:
    """The zero-field limit of the Landau pressure, ``2/(15 pi^2) nu^(5/2)``."""
    nu_arr = _check_nonneg(nu, "nu")
    return _wrap(FREE_PRESSURE_COEFF * nu_arr**2.5, nu)


# ---------------------------------------------------------------------------
# monotone root finding


def monotone_solve(func, target: np.ndarray, start: ArrayLike = 1.0, max_steps: int = 2100) -> np.ndarray:
    """Solve ``func(x) = target`` for nondecreasing ``func`` with ``func(0) = 0``.

    ``start`` is a per-element scale hint.  The bracket is grown by doubling
    (or shrunk by halving) from it, then bisected until it cannot shrink in
    double precision.  Where ``func`` is flat at the target level the
    smallest root is returned.
    """
    target = np.asarray(target, dtype=float)
    hi = np.broadcast_to(np.asarray(start, dtype=float), target.shape).copy()
    hi = np.where(np.isfinite(hi) & (hi > 0), hi, 1.0)
    live = target > 0
    lo = np.zeros_like(target)

    low = live & (func(hi) < target)
    steps = 0
    while np.any(low):
        lo = np.where(low, hi, lo)
        hi = np.where(low, 2.0 * hi, hi)
        steps += 1
        if steps > max_steps or not np.all(np.isfinite(hi)):
            raise BisectionError("could not bracket root")
        low = low & (func(hi) < target)

    # shrink from above while the whole bracket still overshoots
    trial = np.where(live & (lo == 0), 0.5 * hi, lo)
    high = live & (lo == 0) & (func(trial) >= target)
    steps = 0
    while np.any(high) and steps < max_steps:
        hi = np.where(high, trial, hi)
        trial = np.where(high, 0.5 * trial, trial)
        high = high & (trial > 0) & (func(trial) >= target)
        steps += 1
    lo = np.where(live & (lo == 0), np.where(func(trial) < target, trial, 0.0), lo)

    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        active = live & (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        above = func(mid) >= target
        hi = np.where(active & above, mid, hi)
        lo = np.where(active & ~above, mid, lo)
    return np.where(live, hi, 0.0)


# ---------------------------------------------------------------------------
# kinetic energy densities


def _check_t(t: ArrayLike) -> np.ndarray:
    return _check_nonneg(t, "t")


def _level_guess(beta: float, t: np.ndarray) -> np.ndarray:
    # lowest band alone overestimates r; the zero-field limit is accurate
    # once many bands are filled
    scale = pressure_prefactor(beta)
    lowest = (2.0 * math.pi**2 * t / (scale * k_beta(beta))) ** 2
    free = (3.0 * math.pi**2 * t / scale) ** (2.0 / 3.0)
    return np.minimum(lowest, free)


def _check_beta(beta: ArrayLike) -> np.ndarray:
    arr = np.asarray(beta, dtype=float)
    if not np.all(np.isfinite(arr) & (arr > 0)):
        raise ValueError("beta must be > 0")
    return arr


def r_of_rho(beta: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Unique ``r >= 0`` with ``t = (1+beta)^(-3/5) P'_{k_beta}(r)``; broadcasts over ``beta``."""
    b_arr, t_arr = np.broadcast_arrays(_check_beta(beta), _check_t(t))
    shape = t_arr.shape
    b_flat, flat = b_arr.reshape(-1), t_arr.reshape(-1)
    kb = k_beta(b_flat)
    scale = pressure_prefactor(b_flat)
    r = monotone_solve(lambda x: scale * landau_pressure_derivative(kb, x), flat, start=_level_guess(b_flat, flat))
    return _wrap(r.reshape(shape), t, beta)


def tau_mtf(beta: ArrayLike, t: ArrayLike) -> ArrayLike:
    """Magnetic kinetic energy density, broadcasting over ``beta`` and ``t``."""
    r = np.asarray(r_of_rho(beta, t))
    b_arr, t_arr = np.broadcast_arrays(_check_beta(beta), _check_t(t))
    out = t_arr * r - pressure_prefactor(b_arr) * np.asarray(landau_pressure(k_beta(b_arr), r))
    return _wrap(np.maximum(out, 0.0), t, beta)


def tau(regime: KineticRegime, t: ArrayLike) -> ArrayLike:
    """Kinetic energy density at particle density ``t``."""
    if regime.tag == "MTF":
        return tau_mtf(regime.beta, t)
    t_arr = _check_t(t)
    if regime.tag == "TF":
        out = 0.6 * C_TF * t_arr ** (5.0 / 3.0)
    else:
        out = STF_COEFF * t_arr**3
    return _wrap(out, t)


def tau_prime(regime: KineticRegime, t: ArrayLike) -> ArrayLike:
    """Derivative of :func:`tau`; for MTF this is the maximizing level ``r``."""
    t_arr = _check_t(t)
    if regime.tag == "TF":
        out = C_TF * t_arr ** (2.0 / 3.0)
    elif regime.tag == "STF":
        out = 4.0 * math.pi**4 * t_arr**2
    else:
        out = np.asarray(r_of_rho(regime.beta, t_arr))
    return _wrap(out, t)


def r_of_rho_spin(beta: float, t: ArrayLike, s: int) -> ArrayLike:
    """Maximizing level for the spin-resolved transform.

    For ``s = +1`` the pressure is flat on ``[0, 2 k_beta]``, so at ``t = 0``
    every level in that interval is a maximizer; the largest one is returned.
    """
    if not beta > 0:
        raise ValueError("beta must be > 0")
    s = _check_spin(s)
    t_arr = _check_t(t)
    kb = k_beta(beta)
    scale = pressure_prefactor(beta)
    flat = t_arr.reshape(-1)
    start = _level_guess(beta, flat) + 2.0 * kb
    r = monotone_solve(lambda x: scale * spin_pressure_derivative(kb, x, s), flat, start=start)
    if s == 1:
        r = np.where(flat > 0, r, 2.0 * kb)
    return _wrap(r.reshape(t_arr.shape), t)


def tau_spin(beta: float, t: ArrayLike, s: int) -> ArrayLike:
    t_arr = _check_t(t)
    r = np.asarray(r_of_rho_spin(beta, t_arr, s))
    out = t_arr * r - pressure_prefactor(beta) * np.asarray(spin_pressure(k_beta(beta), r, s))
    return _wrap(np.maximum(out, 0.0), t)


def inverse_tau_prime(regime: KineticRegime, arg: ArrayLike) -> ArrayLike:
    """Density solving ``tau'(rho) = arg``; nonpositive arguments map to zero."""
    a = np.maximum(np.asarray(arg, dtype=float), 0.0)
    if regime.tag == "TF":
        out = (a / C_TF) ** 1.5
    elif regime.tag == "STF":
        out = np.sqrt(a) / (2.0 * math.pi**2)
    else:
        beta = regime.beta
        out = pressure_prefactor(beta) * np.asarray(landau_pressure_derivative(k_beta(beta), a))
    return _wrap(out, arg)


def scaled_pressure(regime: KineticRegime, nu: ArrayLike) -> ArrayLike:
    """The convex dual of :func:`tau`: scaled Landau pressure or its limits."""
    nu_arr = _check_nonneg(nu, "nu")
    if regime.tag == "TF":
        out = FREE_PRESSURE_COEFF * nu_arr**2.5
    elif regime.tag == "STF":
        out = nu_arr**1.5 / (3.0 * math.pi**2)
    else:
        out = pressure_prefactor(regime.beta) * np.asarray(landau_pressure(k_beta(regime.beta), nu_arr))
    return _wrap(out, nu)


# ---------------------------------------------------------------------------
# Lieb-Thirring transform


@dataclass(frozen=True)
class LtConstants:
    delta: float = 0.5
    L1: float = field(init=False)
    L2: float = field(init=False)

    def __post_init__(self):
        d = self.delta
        if not 0.0 < d < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        object.__setattr__(self, "L1", (4.0 / 3.0) / (math.pi * (1.0 - d)))
        object.__setattr__(self, "L2", 8.0 * math.sqrt(6.0) / (5.0 * math.pi * d * d))


def lt_maximizer(constants: LtConstants, B: ArrayLike, t: ArrayLike) -> ArrayLike:
    B_arr = np.asarray(B, dtype=float)
    if not np.all(np.isfinite(B_arr) & (B_arr >= 0)):
        raise ValueError("B must be >= 0")
    B_arr, t_arr = np.broadcast_arrays(B_arr, _check_t(t))
    L1, L2 = constants.L1, constants.L2
    bf = B_arr.reshape(-1)
    v = monotone_solve(lambda v: 1.5 * L1 * bf * np.sqrt(v) + 2.5 * L2 * v**1.5, t_arr.reshape(-1))
    return _wrap(v.reshape(t_arr.shape), t, B)


def lt_legendre(constants: LtConstants, B: ArrayLike, t: ArrayLike) -> ArrayLike:
    """``sup_{v>=0} (t v - L1 B v^(3/2) - L2 v^(5/2))``, broadcasting over ``B`` and ``t``."""
    v = np.asarray(lt_maximizer(constants, B, t))
    B_arr, t_arr = np.broadcast_arrays(np.asarray(B, dtype=float), _check_t(t))
    out = t_arr * v - constants.L1 * B_arr * v**1.5 - constants.L2 * v**2.5
    return _wrap(np.maximum(out, 0.0), t, B)
