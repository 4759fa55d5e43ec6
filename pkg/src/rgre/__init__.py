"""Linear multistep ODE solvers with repeated global Richardson extrapolation.

Subpackages:

* problems       benchmark initial-value problems and the registry
* methods        AB/AM/BDF coefficient tables, Ralston starters, stepping
* extrapolation  dyadic-grid combination weights and orchestration
* stability      companion spectra, absolute-stability regions, sector angles
* harness        reference solutions and convergence-order studies
* cli            CSV/JSON command-line front end
"""

__version__ = "0.1.0"

from .extrapolation import (ExtrapolationScheme, RgreResult, combine,
                            gamma_coefficients, run_rgre, work_ratio)
from .harness import (ConvergenceReport, ConvergenceRow, convergence_study,
                      estimated_order, max_norm_error, reference_solution,
                      study_error)
from .methods import (LmmCoefficients, MethodSpec, NewtonConfig, NewtonError,
                      Trajectory, integrate, lmm_coefficients,
                      order_conditions_residual, parse_method, ralston_start,
                      step_explicit, step_implicit, step_pece)
from .problems import (IVP, get_problem, make_dahlquist, make_lotka_volterra,
                       make_van_der_pol, registered_problems)
from .stability import (BoundaryLocus, StabilityVerdict, alpha_angle,
                        boundary_locus, check_root_condition, companion_matrix,
                        in_rgre_stability_region, in_stability_region)
