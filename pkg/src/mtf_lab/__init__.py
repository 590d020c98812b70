"""Magnetic Thomas-Fermi models: Landau-gas thermodynamics, grid functionals,
ground-state solver, phase-space bathtub measures and a Pauli-operator
Weyl-asymptotics oracle."""

__version__ = "0.1.0"

from .landau import (FieldScaling, KineticRegime, LtConstants, inverse_tau_prime, landau_pressure,
                     landau_pressure_derivative, lt_legendre, r_of_rho, scaling_from, spin_pressure,
                     spin_pressure_derivative, tau, tau_mtf, tau_spin)
from .fields import (DensityField, Grid3, InteractionKernel, Potential, convolve, integrate,
                     interaction_energy, lp_norm, mass, potential_energy)
from .functionals import FunctionalSpec, energy, lt_lower_bound
from .minimizer import (BracketFailure, MinimizerConfig, MinimizerResult, NotConverged, beta_sweep,
                        minimize)
from .vlasov import (BathtubMeasure, PhaseSpacePoint, bathtub_from_density, phase_count, vlasov_density,
                     vlasov_energy, vlasov_kinetic)
from .oracle import OracleProblem, OracleResult, quantum_sum, semiclassical_energy, weyl_ratio, weyl_sweep
