"""Limiting diffusions in the non-degenerate slowdown regime."""
from .compare import (
    DominanceResult,
    RatioResult,
    check_stochastic_dominance,
    mean_ratio,
    pod_meanfield_tail,
    ratio_sup,
)
from .drift import DomainError, DriftSpec, NdsParams, drift
from .sde import IntegrationError, SdePath, euler_maruyama
from .stationary import (
    DivergentNormalizerError,
    StationaryDensity,
    cdf_jsq,
    closed_form,
    density_cq,
    density_from_drift,
    density_iqf,
    density_jsq,
    mean_cq,
    mean_iqf,
    mean_jsq,
    mean_of,
    normalizer_jsq,
    truncation_point,
)

__all__ = [
    "NdsParams", "DriftSpec", "DomainError", "drift",
    "StationaryDensity", "DivergentNormalizerError", "closed_form", "density_from_drift",
    "density_jsq", "mean_jsq", "normalizer_jsq", "cdf_jsq",
    "density_cq", "mean_cq", "density_iqf", "mean_iqf", "mean_of", "truncation_point",
    "SdePath", "IntegrationError", "euler_maruyama",
    "RatioResult", "ratio_sup", "mean_ratio", "pod_meanfield_tail",
    "DominanceResult", "check_stochastic_dominance",
]
