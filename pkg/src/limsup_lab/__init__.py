"""Weighted limsup sets over real, complex, quaternion, p-adic and Laurent
rings: dimension formulas, exhaustive linear-form solvers and empirical
harnesses."""

__version__ = "0.1.0"

from .approx import ApproxSpec, PowerProduct, balance_rho_padic, balance_rho_real, series_partial_sums
from .dimension import (
    ClosedFormCase,
    Setting,
    closed_form,
    cover_exponents,
    grid_optimize_lower_bound,
    mtpr_lower_bound,
    problem_for,
    select_exponents,
)
from .errors import (
    BudgetExceeded,
    EmptyAdmissibleSet,
    HypothesisViolated,
    LimsupError,
    MissingRequired,
    OutOfTableRange,
    ParseError,
    PrecisionExhausted,
    PreconditionUnmet,
    UnattainableHeight,
    UnknownKey,
)
from .lab import (
    DichotomyScan,
    MembershipQuery,
    box_count_dimension,
    covering_sum,
    covering_transition,
    is_member_truncated,
    measure_scan,
)
from .rings import AmbientPoint, IntegerPoint, Kind, RingDescriptor
from .solver import (
    LinearFormSystem,
    SolutionRecord,
    Status,
    Strategy,
    certify_minkowski,
    empirical_ubiquity_check,
    solve,
)
