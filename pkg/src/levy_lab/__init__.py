"""Corner reductions, quotient diameters and concentration of measure on U(n) and O(n)
with the normalized trace metric ``d(u, v) = tr|u - v| / n``."""

__version__ = "0.1.0"

from .concentration import (  # noqa: E402
    ConcentrationEstimate,
    LevyReport,
    LipschitzObservable,
    distance_to_point,
    empirical_median,
    estimate_concentration,
    evaluate_observable,
    levy_bound,
    levy_family_report,
    linear_functional,
    lipschitz_check,
    martingale_bound,
)
from .haar import (  # noqa: E402
    CMVSample,
    GroupSpec,
    UnitaryElement,
    sample_cmv_model,
    sample_ginibre,
    sample_haar,
    sample_haar_orthogonal,
    sample_haar_unitary,
)
from .linalg import (  # noqa: E402
    absolute_value,
    hermitian_eigen,
    numerical_rank,
    operator_norm,
    qr_unitary,
    trace_distance,
    trace_norm_normalized,
)
from .reduction import (  # noqa: E402
    CornerReduction,
    DiameterEstimate,
    ReductionChain,
    corner_reduce,
    estimate_quotient_diameter,
    reduction_chain,
    refine_infimum,
    tensor_embed,
)
from .rng import DEFAULT_SEED, SeededRng  # noqa: E402
