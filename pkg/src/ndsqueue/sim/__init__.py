"""Finite-k simulators: a level-count CTMC and a general event-driven engine."""
from .ctmc import run_ctmc
from .event import run_event_driven
from .metrics import expected_idle_given, idle_conditional_mean, merge_metrics, ssc_deviation
from .state import (
    EmptyHorizonError,
    EngineMismatchError,
    SimConfig,
    StabilityWarning,
    SystemState,
    Trace,
    TraceMetrics,
    balanced_levels,
)


def simulate(cfg: SimConfig, engine: str = "auto", stream=None) -> TraceMetrics:
    """Run ``cfg`` on the CTMC engine when it can, otherwise event-driven."""
    if engine == "auto":
        use_ctmc = cfg.service_dist.encode()[0] == 1 and not cfg.policy.needs_work
        engine = "ctmc" if use_ctmc else "event"
    if engine == "ctmc":
        return run_ctmc(cfg, stream)
    if engine == "event":
        return run_event_driven(cfg, stream)
    raise ValueError(f"unknown engine {engine!r}")


__all__ = [
    "SimConfig",
    "SystemState",
    "Trace",
    "TraceMetrics",
    "EngineMismatchError",
    "EmptyHorizonError",
    "StabilityWarning",
    "balanced_levels",
    "run_ctmc",
    "run_event_driven",
    "simulate",
    "ssc_deviation",
    "idle_conditional_mean",
    "merge_metrics",
    "expected_idle_given",
]
