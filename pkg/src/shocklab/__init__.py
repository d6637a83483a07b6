"""shocklab: numerical laboratory for L2 stability of small viscous shocks
under nonlinear dissipation, via a weighted relative entropy contracted up
to a Lipschitz shift."""

__version__ = "0.1.0"

from .model import (BUILTIN_NAMES, ModelSpec, get_model, normalize_flux,
                    rankine_hugoniot_speed, relative, relative_flux_F)
from .profile import (ShockProfile, WeightFunction, build_weight,
                      default_lambda, entropic_coordinate, solve_profile)
from .solver import Field, Grid, semidiscrete_rhs, step, total_mass_deviation
from .functionals import (FunctionalReport, compute_x_space, compute_y_space,
                          relative_entropy, y_bounds_l2_check)
from .shift import (DiagnosticsRecord, EvolutionResult, evolve_coupled,
                    gamma_rhs, phi_eps)
from .inequalities import (TestFunctionFamily, functional_sign_search,
                           gn_check, poincare_functional, poincare_sweep)

__all__ = [
    "BUILTIN_NAMES", "ModelSpec", "get_model", "normalize_flux",
    "rankine_hugoniot_speed", "relative", "relative_flux_F",
    "ShockProfile", "WeightFunction", "build_weight", "default_lambda",
    "entropic_coordinate", "solve_profile",
    "Field", "Grid", "semidiscrete_rhs", "step", "total_mass_deviation",
    "FunctionalReport", "compute_x_space", "compute_y_space",
    "relative_entropy", "y_bounds_l2_check",
    "DiagnosticsRecord", "EvolutionResult", "evolve_coupled", "gamma_rhs",
    "phi_eps",
    "TestFunctionFamily", "functional_sign_search", "gn_check",
    "poincare_functional", "poincare_sweep",
]
