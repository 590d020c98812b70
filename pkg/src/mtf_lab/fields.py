"""Uniform box grids, density fields, external potentials and pair kernels.

Densities are piecewise constant on the cells of a :class:`Grid3`; every
integral is the midpoint rule (cell value times cell volume).  Arrays are
indexed ``[ix, iy, iz]``; the serialized form (see :mod:`mtf_lab.io`) walks
them x-fastest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class GridMismatch(ValueError):
    pass


def _triple(x, name) -> tuple:
    if np.ndim(x) == 0:
        x = (x, x, x)
    x = tuple(x)
    if len(x) != 3:
        raise ValueError(f"{name} must be a scalar or a length-3 sequence")
    return x


@dataclass(frozen=True)
class Grid3:
    """Cell-centred grid on the box ``(-L_x, L_x) x (-L_y, L_y) x (-L_z, L_z)``."""

    extent: tuple
    points: tuple

    def __post_init__(self):
        extent = tuple(float(e) for e in _triple(self.extent, "extent"))
        points = tuple(int(n) for n in _triple(self.points, "points"))
        if any(not (math.isfinite(e) and e > 0) for e in extent):
            raise ValueError("extent must be positive")
        if any(n <= 0 or n % 2 for n in points):
            raise ValueError("points per axis must be positive even integers")
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "points", points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> tuple:
        return tuple(2.0 * e / n for e, n in zip(self.extent, self.points))

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.spacing
        return hx * hy * hz

    @property
    def volume(self) -> float:
        return 8.0 * self.extent[0] * self.extent[1] * self.extent[2]

    @property
    def size(self) -> int:
        return self.points[0] * self.points[1] * self.points[2]

    def axis(self, i: int) -> np.ndarray:
        h = self.spacing[i]
        return -self.extent[i] + h * (np.arange(self.points[i]) + 0.5)

    def mesh(self) -> tuple:
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")

    def radius_squared(self) -> np.ndarray:
        x, y, z = (self.axis(i) for i in range(3))
        return x[:, None, None] ** 2 + y[None, :, None] ** 2 + z[None, None, :] ** 2

    def refined(self) -> "Grid3":
        return Grid3(self.extent, tuple(2 * n for n in self.points))

    def to_dict(self) -> dict:
        return {"extent": list(self.extent), "points": list(self.points), "spacing": list(self.spacing)}


SPINS = (-1, 1)


@dataclass
class DensityField:
    """Nonnegative density on a grid; ``values`` has shape ``grid.shape``,
    or ``(2,) + grid.shape`` for a spin-resolved field (index 0 is s = -1).
    """

    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape not in (self.grid.shape, (2,) + self.grid.shape):
            raise GridMismatch(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative")
        self.values = v

    @property
    def spin_resolved(self) -> bool:
        return self.values.ndim == 4

    def total(self) -> np.ndarray:
        """Spin-summed values."""
        return self.values.sum(axis=0) if self.spin_resolved else self.values

    def channel(self, s: int) -> np.ndarray:
        if not self.spin_resolved:
            raise ValueError("field is not spin resolved")
        return self.values[SPINS.index(s)]

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_volume)

    def normalized(self) -> "DensityField":
        m = self.mass()
        if m <= 0:
            raise ValueError("cannot normalize a field of zero mass")
        return DensityField(self.grid, self.values / m)

    def split_spin(self, fraction_down: float = 0.5) -> "DensityField":
        v = self.total()
        return DensityField(self.grid, np.stack([fraction_down * v, (1.0 - fraction_down) * v]))


def gaussian_density(grid: Grid3, width=None, center=(0.0, 0.0, 0.0)) -> DensityField:
    """Normalized Gaussian blob; default width is a quarter of the extent per axis."""
    width = _triple(width if width is not None else tuple(e / 4.0 for e in grid.extent), "width")
    arg = 0.0
    for i in range(3):
        a = (grid.axis(i) - center[i]) / width[i]
        shape = [1, 1, 1]
        shape[i] = -1
        arg = arg + (a**2).reshape(shape)
    return DensityField(grid, np.exp(-0.5 * arg)).normalized()


def integrate(where, values=None) -> float:
    """Midpoint rule.  ``integrate(rho)`` or ``integrate(grid, values)``."""
    if isinstance(where, DensityField):
        return float(np.sum(where.values) * where.grid.cell_volume)
    return float(np.sum(values) * where.cell_volume)


def mass(rho: DensityField) -> float:
    return rho.mass()


def lp_norm(rho: DensityField, p: float) -> float:
    return integrate(rho.grid, rho.total() ** p) ** (1.0 / p)


# ---------------------------------------------------------------------------
# external potentials


@dataclass(frozen=True)
class Potential:
    """External potential.

    kinds: ``harmonic`` (``stiffness * |x|^2``), ``quartic``
    (``coefficient * |x|^4``), ``radial`` (piecewise-linear table in ``|x|``,
    constant beyond the last node) and ``tabulated`` (values on a grid).
    ``offset`` is added everywhere.
    """

    kind: str
    stiffness: float = 1.0
    coefficient: float = 1.0
    radii: Optional[tuple] = None
    table: Optional[tuple] = None
    grid_values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "quartic", "radial", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind in ("harmonic", "quartic"):
            c = self.stiffness if self.kind == "harmonic" else self.coefficient
            if not (math.isfinite(c) and c > 0):
                raise ValueError("confining potentials need a positive coefficient")
        if self.kind == "radial":
            r = np.asarray(self.radii, dtype=float)
            v = np.asarray(self.table, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2 or np.any(np.diff(r) <= 0):
                raise ValueError("radial table needs increasing radii and matching values")
            if not np.all(np.isfinite(v)):
                raise ValueError("radial table values must be finite")
        if self.kind == "tabulated":
            if self.grid_values is None or not np.all(np.isfinite(self.grid_values)):
                raise ValueError("tabulated potential needs finite grid values")

    @classmethod
    def harmonic(cls, stiffness: float = 1.0, offset: float = 0.0) -> "Potential":
        return cls("harmonic", stiffness=stiffness, offset=offset)

    @classmethod
    def quartic(cls, coefficient: float = 1.0, offset: float = 0.0) -> "Potential":
        return cls("quartic", coefficient=coefficient, offset=offset)

    @classmethod
    def radial(cls, radii: Sequence[float], values: Sequence[float], offset: float = 0.0) -> "Potential":
        return cls("radial", radii=tuple(map(float, radii)), table=tuple(map(float, values)), offset=offset)

    @classmethod
    def tabulated(cls, values: np.ndarray, offset: float = 0.0) -> "Potential":
        return cls("tabulated", grid_values=np.asarray(values, dtype=float), offset=offset)

    def shifted(self, c: float) -> "Potential":
        return Potential(self.kind, self.stiffness, self.coefficient, self.radii, self.table,
                         self.grid_values, self.offset + c)

    def on(self, grid: Grid3) -> np.ndarray:
        if self.kind == "harmonic":
            v = self.stiffness * grid.radius_squared()
        elif self.kind == "quartic":
            v = self.coefficient * grid.radius_squared() ** 2
        elif self.kind == "radial":
            v = np.interp(np.sqrt(grid.radius_squared()), self.radii, self.table)
        else:
            v = np.asarray(self.grid_values, dtype=float)
            if v.shape != grid.shape:
                raise GridMismatch(f"tabulated potential of shape {v.shape} on grid {grid.shape}")
            v = v.copy()
        return v + self.offset

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "offset": self.offset}
        if self.kind == "harmonic":
            d["stiffness"] = self.stiffness
        elif self.kind == "quartic":
            d["coefficient"] = self.coefficient
        elif self.kind == "radial":
            d.update(radii=list(self.radii), values=list(self.table))
        return d


# ---------------------------------------------------------------------------
# pair interactions


@dataclass(frozen=True)
class InteractionKernel:
    """Even pair interaction ``w``.

    ``gaussian`` is the normalized Gaussian ``amplitude (2 pi width^2)^(-3/2)
    exp(-|x|^2 / 2 width^2)``, so it integrates to ``amplitude``.
    ``yukawa`` is ``amplitude exp(-screening |x|) / |x|`` and ``coulomb`` is
    ``amplitude / |x|``; both act through their Fourier multipliers on the
    zero-padded box.  For ``coulomb`` the k = 0 multiplier is set to zero,
    which fixes the additive constant of ``w * rho`` (energies are reported
    in that gauge).  ``tabulated`` holds kernel values on the lag lattice of
    the padded box: shape ``(2 n_x, 2 n_y, 2 n_z)`` in FFT order, i.e. entry
    ``[m]`` is the lag ``m h`` for ``m < n`` and ``(m - 2n) h`` otherwise.
    """

    kind: str = "none"
    amplitude: float = 0.0
    width: float = 1.0
    screening: float = 1.0
    lag_values: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "yukawa", "coulomb", "tabulated"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("gaussian", "yukawa", "coulomb") and not math.isfinite(self.amplitude):
            raise ValueError("kernel amplitude must be finite")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")
        if self.kind == "yukawa" and not self.screening > 0:
            raise ValueError("yukawa screening must be positive")
        if self.kind == "tabulated":
            w = np.asarray(self.lag_values, dtype=float)
            if w.ndim != 3 or not np.all(np.isfinite(w)):
                raise ValueError("tabulated kernel needs a finite 3-D lag table")
            if not _is_even(w):
                raise ValueError("tabulated kernel is not even: w(x) != w(-x)")

    @classmethod
    def none(cls) -> "InteractionKernel":
        return cls("none")

    @classmethod
    def gaussian(cls, amplitude: float, width: float) -> "InteractionKernel":
        return cls("gaussian", amplitude=amplitude, width=width)

    @classmethod
    def yukawa(cls, amplitude: float, screening: float) -> "InteractionKernel":
        return cls("yukawa", amplitude=amplitude, screening=screening)

    @classmethod
    def coulomb(cls, amplitude: float) -> "InteractionKernel":
        return cls("coulomb", amplitude=amplitude)

    @classmethod
    def tabulated(cls, lag_values: np.ndarray) -> "InteractionKernel":
        return cls("tabulated", lag_values=np.asarray(lag_values, dtype=float))

    @property
    def is_none(self) -> bool:
        return self.kind == "none" or (self.kind != "tabulated" and self.amplitude == 0.0)

    def __call__(self, r2: np.ndarray) -> np.ndarray:
        """Real-space value at squared distance ``r2`` (gaussian only)."""
        if self.kind != "gaussian":
            raise NotImplementedError(f"pointwise values are not available for {self.kind!r}")
        s2 = self.width**2
        return self.amplitude * (2.0 * math.pi * s2) ** -1.5 * np.exp(-0.5 * r2 / s2)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("gaussian", "yukawa", "coulomb"):
            d["amplitude"] = self.amplitude
        if self.kind == "gaussian":
            d["width"] = self.width
        if self.kind == "yukawa":
            d["screening"] = self.screening
        return d


def _is_even(w: np.ndarray) -> bool:
    # index m <-> -m mod 2n; the Nyquist lag (m = n) is never used
    flipped = np.roll(w[::-1, ::-1, ::-1], 1, axis=(0, 1, 2))
    return np.allclose(w, flipped, rtol=1e-12, atol=1e-300)


def _lag_axis(n: int, h: float) -> np.ndarray:
    m = np.arange(2 * n)
    return np.where(m < n, m, m - 2 * n) * h


def padded_shape(grid: Grid3) -> tuple:
    return tuple(2 * n for n in grid.shape)


def kernel_spectrum(w: InteractionKernel, grid: Grid3) -> np.ndarray:
    """Multiplier acting on ``rfftn`` of the zero-padded density."""
    shape = padded_shape(grid)
    if w.kind == "gaussian" or w.kind == "tabulated":
        if w.kind == "gaussian":
            lx, ly, lz = (_lag_axis(n, h) for n, h in zip(grid.shape, grid.spacing))
            r2 = lx[:, None, None] ** 2 + ly[None, :, None] ** 2 + lz[None, None, :] ** 2
            table = w(r2)
        else:
            table = np.asarray(w.lag_values, dtype=float)
            if table.shape != shape:
                raise GridMismatch(f"kernel lag table {table.shape} does not match padded grid {shape}")
        return np.fft.rfftn(table) * grid.cell_volume
    kx = 2.0 * math.pi * np.fft.fftfreq(shape[0], grid.spacing[0])
    ky = 2.0 * math.pi * np.fft.fftfreq(shape[1], grid.spacing[1])
    kz = 2.0 * math.pi * np.fft.rfftfreq(shape[2], grid.spacing[2])
    k2 = kx[:, None, None] ** 2 + ky[None, :, None] ** 2 + kz[None, None, :] ** 2
    if w.kind == "yukawa":
        return 4.0 * math.pi * w.amplitude / (k2 + w.screening**2)
    if w.kind == "coulomb":
        with np.errstate(divide="ignore"):
            mult = np.where(k2 > 0, 4.0 * math.pi * w.amplitude / np.where(k2 > 0, k2, 1.0), 0.0)
        return mult
    raise ValueError(f"no spectrum for kernel kind {w.kind!r}")


class Convolver:
    """Caches the kernel spectrum for repeated ``w * rho`` on one grid."""

    def __init__(self, w: InteractionKernel, grid: Grid3):
        self.w = w
        self.grid = grid
        self._spectrum = None if w.is_none else kernel_spectrum(w, grid)

    def __call__(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatch(f"field of shape {values.shape} on grid {self.grid.shape}")
        if self._spectrum is None:
            return np.zeros(self.grid.shape)
        shape = padded_shape(self.grid)
        axes = (0, 1, 2)
        spec = np.fft.rfftn(values, s=shape, axes=axes) * self._spectrum
        out = np.fft.irfftn(spec, s=shape, axes=axes)
        nx, ny, nz = self.grid.shape
        return out[:nx, :ny, :nz]


def convolve(w: InteractionKernel, rho) -> np.ndarray:
    """``(w * rho)(x)`` on the grid of ``rho`` (spin channels are summed)."""
    return Convolver(w, rho.grid)(rho.total())


def interaction_energy(w: InteractionKernel, rho: DensityField, convolver: Convolver | None = None) -> float:
    if w.is_none:
        return 0.0
    conv = convolver or Convolver(w, rho.grid)
    total = rho.total()
    return 0.5 * integrate(rho.grid, total * conv(total))


def potential_energy(V: Potential, rho: DensityField) -> float:
    return integrate(rho.grid, V.on(rho.grid) * rho.total())
