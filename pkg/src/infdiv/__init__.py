"""Infinite divisibility of a pair of squared Gaussian norms.

Numerical toolkit for the two-block trace-sum characterization: two
independent evaluators for the sums, closed forms for low orders, signature
criteria with constructed witnesses, a falsification search, and the joint
Laplace transform via closed form, series and Monte Carlo.
"""

from .errors import (
    CapExceeded,
    DegenerateInput,
    InfdivError,
    NotPositiveDefinite,
    PreconditionViolated,
    ShapeError,
)
from .matcore import (
    EigenPair2,
    SymMatrix,
    cholesky,
    eigen2,
    eigen_sym,
    inverse_spd,
    is_positive_definite,
    solve_spd,
    symmetrize,
)
from .model import (
    A_GRID_DEFAULT,
    BlockMatrix,
    CovarianceModel,
    DeltaEpsilonFamily,
    invert_blocks,
    materialize,
    scale_to_unit_spectral_radius,
    tilt_matrix,
)
from .tracesum import (
    DP_CAP,
    ENUM_CAP,
    CoeffTable,
    TraceSumResult,
    closed_sum_33,
    closed_sum_34,
    coeff_table,
    compositions,
    double_bridge_trace,
    dp_grid,
    single_bridge_trace,
    swap_blocks,
    trace_sum_dp,
    trace_sum_enum,
)
from .criteria import (
    CriterionReport,
    FalsifyResult,
    SignatureMatrix,
    block_diagonalize,
    canonical_rotation,
    construct_nonneg_signature,
    construct_nonpos_offdiag,
    falsify_word_positivity,
    griffiths_bapat_check,
    nonneg_signature_check,
    precision_signature_check,
    scalar_bridge_report,
    shanbhag_check,
    word_positivity_check,
)
from .laplace import (
    DualPoint,
    SeriesResult,
    auto_nmax,
    laplace_closed,
    laplace_series,
    log_transform_coefficients,
    monte_carlo,
)
from .sampling import random_covariance, random_tilt_like

__version__ = "0.1.0"

__all__ = [
    "A_GRID_DEFAULT",
    "BlockMatrix",
    "CapExceeded",
    "CoeffTable",
    "CovarianceModel",
    "CriterionReport",
    "DP_CAP",
    "DegenerateInput",
    "DeltaEpsilonFamily",
    "DualPoint",
    "ENUM_CAP",
    "EigenPair2",
    "FalsifyResult",
    "InfdivError",
    "NotPositiveDefinite",
    "PreconditionViolated",
    "SeriesResult",
    "ShapeError",
    "SignatureMatrix",
    "SymMatrix",
    "TraceSumResult",
    "auto_nmax",
    "block_diagonalize",
    "canonical_rotation",
    "cholesky",
    "closed_sum_33",
    "closed_sum_34",
    "coeff_table",
    "compositions",
    "construct_nonneg_signature",
    "construct_nonpos_offdiag",
    "double_bridge_trace",
    "dp_grid",
    "eigen2",
    "eigen_sym",
    "falsify_word_positivity",
    "griffiths_bapat_check",
    "inverse_spd",
    "invert_blocks",
    "is_positive_definite",
    "laplace_closed",
    "laplace_series",
    "log_transform_coefficients",
    "materialize",
    "monte_carlo",
    "nonneg_signature_check",
    "precision_signature_check",
    "random_covariance",
    "random_tilt_like",
    "scalar_bridge_report",
    "scale_to_unit_spectral_radius",
    "shanbhag_check",
    "single_bridge_trace",
    "solve_spd",
    "swap_blocks",
    "symmetrize",
    "tilt_matrix",
    "trace_sum_dp",
    "trace_sum_enum",
    "word_positivity_check",
    "__version__",
]
