"""A-hypergeometric distributions.

Exact normalizing constants and moments by fiber enumeration, Gale
transforms, Newton polytopes, generalized iterative proportional scaling,
conditional maximum likelihood, large-sample approximations and the
terminating Lauricella ``F_D``.
"""

from .asymptotics import AsymptoticReport, approx_log_Z, gaussian_density, moment_ips_gap, sup_ratio_error
from .dist import (
    DistSummary,
    ModelPoint,
    covariance,
    generalized_odds,
    moment_map,
    normalizing_constant,
    probability,
    summarize,
)
from .errors import *  # noqa: F401,F403
from .fiber import Fiber, count_fiber, enumerate_fiber, stream_fiber
from .ips import IPSResult, i_divergence, ips_classical_2way, ips_solve, ips_step_multiplier
from .lauricella import FDParams, fd_eval, fd_moment_map, fd_polytope_member, fd_table
from .linalg import (
    ConfigMatrix,
    GaleTransform,
    check_configuration,
    gale_transform,
    smith_normal_form,
    two_way_configuration,
    two_way_margins,
)
from .mle import FitResult, MLEProblem, invert_moment_map, log_likelihood, moment_jacobian
from .polytope import SupportPolytope, cone_interior, newton_polytope, relint_member, transportation_relint

__version__ = "0.1.0"
