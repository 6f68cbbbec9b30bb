"""Robust causal discovery for linear non-Gaussian acyclic models.

Direct ordering search with pluggable slope estimators (least squares,
Theil-Sen, repeated median) and dependence measures (kernel-based
mutual information, distance correlation), plus a model simulator and
experiment drivers.
"""

__version__ = "0.1.0"

from .discovery import (
    DiscoveryConfig,
    DiscoveryResult,
    discover,
    estimate_causal_order,
    estimate_connection_matrix,
    prune_adaptive_lasso,
)
from .exceptions import (
    ConstantInput,
    ConstantPredictor,
    DegenerateData,
    ParseError,
    RobustLingamError,
    SingularDesign,
)
from .harness import (
    ExperimentReport,
    SimulationSettings,
    run_benchmark,
    run_outlier_grid,
    run_simulation,
)
from .independence import (
    KbiConfig,
    distance_correlation,
    fast_distance_correlation,
    kernel_mutual_information,
    measure_function,
)
from .scm import (
    DataMatrix,
    ExponentialCentered,
    LognormalCentered,
    ParetoCentered,
    ScmSpec,
    StudentT,
    generate_random_scm,
    inject_outlier,
    noise_from_dict,
    noise_from_string,
    order_respects_weights,
    sample,
)
from .slopes import (
    ols_slope,
    repeated_median_slope,
    residuals,
    slope_function,
    theil_sen_slope,
)

__all__ = [
    "__version__",
    "DiscoveryConfig",
    "DiscoveryResult",
    "discover",
    "estimate_causal_order",
    "estimate_connection_matrix",
    "prune_adaptive_lasso",
    "ConstantInput",
    "ConstantPredictor",
    "DegenerateData",
    "ParseError",
    "RobustLingamError",
    "SingularDesign",
    "ExperimentReport",
    "SimulationSettings",
    "run_benchmark",
    "run_outlier_grid",
    "run_simulation",
    "KbiConfig",
    "distance_correlation",
    "fast_distance_correlation",
    "kernel_mutual_information",
    "measure_function",
    "DataMatrix",
    "ExponentialCentered",
    "LognormalCentered",
    "ParetoCentered",
    "ScmSpec",
    "StudentT",
    "generate_random_scm",
    "inject_outlier",
    "noise_from_dict",
    "noise_from_string",
    "order_respects_weights",
    "sample",
    "ols_slope",
    "repeated_median_slope",
    "residuals",
    "slope_function",
    "theil_sen_slope",
]
