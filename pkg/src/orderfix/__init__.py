"""Fixed points of monotone operators between a strong supersolution and a
strong subsolution placed in reversed order, ``lo << hi`` with
``T lo << lo`` and ``T hi >> hi``."""

from .exceptions import (
    AnchorOverlapError,
    AnchorSearchError,
    DomainError,
    EvaluationError,
    GridMismatchError,
    JacobianBreakdown,
    MonotonicityError,
    NotMonotoneStart,
    OrbitOrderViolation,
)
from .lattice import (
    Grid,
    GridFunction,
    OrderInterval,
    StrictMargin,
    clamp_to_interval,
    inf2,
    interior_distance,
    leq,
    lt,
    normality_constant,
    strictly_less,
    sup2,
    sup_norm,
)
from .operators import (
    CertificationReport,
    MonotoneOperator,
    certify,
    certify_boundary,
    certify_monotone,
    check_endpoints_fixed,
    truncate,
)
from .solver import (
    AnchorPair,
    Classification,
    SolveReport,
    SolverConfig,
    find_anchors,
    find_interior_fixed_point,
    monotone_iterate,
    newton_refine,
    scan_fixed_points,
    segment_point,
    solve,
)
from .hammerstein import (
    KernelSpec,
    NonlinearitySpec,
    ProblemInstance,
    assemble,
    catalog,
    get_instance,
)

__version__ = "0.1.0"
