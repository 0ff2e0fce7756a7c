"""Simulation and diffusion analysis of k-server load balancing.

The regime of interest keeps the number of spare servers fixed as the
system grows: arrival rate ``(k - alpha) * mu`` for ``k`` unit-rate servers.
Subpackages:

``ndsqueue.sim``          finite-k simulators and run metrics
``ndsqueue.diffusion``    the limit diffusions and their stationary laws
``ndsqueue.oracles``      exact reference values for tests
``ndsqueue.experiments``  grids, statistics, figure recipes and the CLI
"""
from .distributions import (
    PRESETS,
    Bimodal,
    Deterministic,
    Exponential,
    ParameterError,
    RandomStream,
    Weibull,
    exp_interarrival,
    get_distribution,
    moments,
    sample,
)
from .policies import CENTRAL_BUFFER, CapabilityError, Policy, StateView, dispatch, parse_policy

__version__ = "0.1.0"

__all__ = [
    "RandomStream", "Deterministic", "Exponential", "Bimodal", "Weibull", "PRESETS",
    "get_distribution", "sample", "moments", "exp_interarrival", "ParameterError",
    "Policy", "StateView", "dispatch", "parse_policy", "CENTRAL_BUFFER", "CapabilityError",
]
