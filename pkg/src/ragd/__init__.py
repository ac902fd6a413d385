"""Riemannian accelerated gradient descent with runtime estimate-sequence diagnostics."""

from ._accel import HAVE_NUMBA, USE_NUMBA, backend_name
from .diagnostics import (DiagnosticsRecord, EstimateSeqState, EstimateSequenceMonitor,
                          check_comparison, check_complete_square, check_lower_bound,
                          check_theorem1, check_theorem4, check_weak_estimate, update_phi_star)
from .exceptions import (ConfigError, ContractError, CutLocusError, IterationError,
                         ParameterError, RagdError)
from .manifolds import (SPD, Euclidean, Hyperbolic, Manifold, ManifoldDescriptor, Point, Sphere,
                        Tangent, curvature_bounds, make_manifold)
from .objectives import (Objective, constant_objective, euclidean_quadratic,
                         frechet_mean_objective, solve_frechet_mean, squared_distance_objective)
from .optimizers import (RagdParams, RagdState, Trace, constant_params, radius_D, ragd_run,
                         ragd_step, rgd_run, rgd_step, solve_alpha, theoretical_rate)

__version__ = "0.1.0"
