"""Thomas-Fermi type energy functionals evaluated on grid densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import landau
from .fields import Convolver, DensityField, InteractionKernel, Potential, integrate
from .landau import FieldScaling, KineticRegime, LtConstants

NORMALIZATION_TOL = 1e-8


class NotNormalized(ValueError):
    pass


@dataclass(frozen=True)
class FunctionalSpec:
    regime: KineticRegime
    V: Potential
    w: InteractionKernel = field(default_factory=InteractionKernel.none)
    spin_resolved: bool = False

    def __post_init__(self):
        if self.spin_resolved and self.regime.tag != "MTF":
            raise ValueError("spin-resolved functional is only defined for the MTF regime")

    def with_regime(self, regime: KineticRegime) -> "FunctionalSpec":
        return FunctionalSpec(regime, self.V, self.w, self.spin_resolved and regime.tag == "MTF")


@dataclass(frozen=True)
class EnergyRecord:
    kinetic: float
    external: float
    interaction: float
    mass: float

    @property
    def total(self) -> float:
        return self.kinetic + self.external + self.interaction

    def to_dict(self) -> dict:
        return {"kinetic": self.kinetic, "external": self.external, "interaction": self.interaction,
                "total": self.total, "mass": self.mass}


def kinetic_density(spec: FunctionalSpec, rho: DensityField) -> np.ndarray:
    """Pointwise kinetic energy density ``tau(rho(x))`` (spin channels summed)."""
    if spec.spin_resolved:
        if not rho.spin_resolved:
            raise ValueError("spin-resolved functional needs a spin-resolved density")
        beta = spec.regime.beta
        return sum(np.asarray(landau.tau_spin(beta, rho.channel(s), s)) for s in (-1, 1))
    return np.asarray(landau.tau(spec.regime, rho.total()))


def energy(spec: FunctionalSpec, rho: DensityField, *, allow_unnormalized: bool = False,
           convolver: Convolver | None = None, potential: np.ndarray | None = None) -> EnergyRecord:
    """Kinetic, external and interaction parts of the functional at ``rho``.

    ``convolver``/``potential`` let repeated callers on one grid reuse the
    kernel spectrum and the tabulated ``V``.
    """
    m = rho.mass()
    if not allow_unnormalized and abs(m - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"density has mass {m!r}; pass allow_unnormalized=True to evaluate anyway")
    grid = rho.grid
    total = rho.total()
    kin = integrate(grid, kinetic_density(spec, rho))
    V = spec.V.on(grid) if potential is None else potential
    ext = integrate(grid, V * total)
    if spec.w.is_none:
        inter = 0.0
    else:
        conv = convolver or Convolver(spec.w, grid)
        inter = 0.5 * integrate(grid, total * conv(total))
    return EnergyRecord(kin, ext, inter, m)


def lt_lower_bound(rho: DensityField, scaling: FieldScaling, constants: LtConstants | None = None) -> float:
    """``hbar^2 * int F_{b/hbar}(rho(x)) dx`` with the magnetic Lieb-Thirring transform."""
    constants = constants or LtConstants()
    B = scaling.b / scaling.hbar
    f = np.asarray(landau.lt_legendre(constants, B, rho.total()))
    return scaling.hbar**2 * integrate(rho.grid, f)
