"""Time-domain Maxwell simulator with a weak-solution verification harness.

The package builds mutually adjoint discrete curl operators on a staggered
grid, integrates the Maxwell system under perfectly conducting walls, and
certifies the energy equality, the weak-form integral identity, the temporal
mollification properties, and the uniqueness mechanism on solver traces.
"""

from .errors import (AdmissibilityError, BlowUpError, CoercivityError,
                     ConfigurationError, ContractViolationError,
                     HypothesisViolationError, PoyntingError, SolverError,
                     UnsupportedLayoutError)
from .mesh import (EdgeField, FaceField, Grid, adjointness_defect, build_grid,
                   curl_e, curl_h, inner, norm, pack, set_deterministic,
                   unpack_edge, unpack_face)
from .materials import (CurrentSpec, MaterialSet, apply_tensor,
                        load_material_file, ohm_current, validate)
from .stepper import (FieldState, StepperConfig, cfl_limit, cg_solve,
                      initialize_leapfrog, simulate, step_leapfrog,
                      step_midpoint)
from .energy import (EnergyLedger, balance_residual, energy,
                     energy_bound_check, energy_bound_margin, joule_power,
                     poynting_flux)
from .steklov import (TimeSeries, check_adjoint_identity, check_convergence,
                      check_nonexpansive, hat_field, steklov_derivative,
                      steklov_mean)

__version__ = "0.1.0"
