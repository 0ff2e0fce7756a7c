"""Derived quantities computed from traces and run metrics."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .state import SystemState, Trace, TraceMetrics

__all__ = ["ssc_deviation", "idle_conditional_mean", "merge_metrics"]


def _ssc(N, M1, k):
    n_hat = np.asarray(N, dtype=float) / k
    return np.abs(np.clip(2.0 - n_hat, 0.0, None) - np.asarray(M1, dtype=float) / k)


def ssc_deviation(trace) -> float:
    """Largest gap between the share of length-1 queues and ``(2 - N/k)+``.

    Accepts a :class:`Trace`, a :class:`SystemState`, or a
    :class:`TraceMetrics` (whose engine tracked the supremum at every
    post-warmup event).
    """
    if isinstance(trace, TraceMetrics):
        return float(trace.ssc_sup)
    if isinstance(trace, SystemState):
        return float(_ssc(trace.total_jobs, trace.m(1), trace.k))
    if isinstance(trace, Trace):
        if len(trace) == 0:
            return 0.0
        return float(_ssc(trace.total_jobs, trace.m1, trace.k).max())
    raise TypeError(f"cannot take a state-space-collapse deviation of {type(trace).__name__}")


def idle_conditional_mean(metrics: TraceMetrics, bin_edges: Sequence[float]) -> dict:
    """Time-weighted mean idle count given ``N/k`` in each bin.

    Bins are half-open ``[lo, hi)`` in units of ``N/k``.  A bin the run never
    visited maps to ``None`` rather than zero.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges must be an increasing sequence of at least two values")
    k = metrics.k
    n_hat = np.arange(len(metrics.n_time)) / k
    out = {}
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (n_hat >= lo - 1e-12) & (n_hat < hi - 1e-12)
        w = metrics.n_time[sel].sum()
        out[(float(lo), float(hi))] = float(metrics.idle_by_n[sel].sum() / w) if w > 0 else None
    return out


def merge_metrics(runs: Sequence[TraceMetrics]) -> TraceMetrics:
    """Pool independent runs of the same system by time-weighted averaging."""
    runs = list(runs)
    if not runs:
        raise ValueError("nothing to merge")
    k = runs[0].k
    if any(r.k != k for r in runs):
        raise ValueError("cannot merge runs with different k")
    w = np.array([r.measured_time for r in runs])
    W = w.sum()

    def pooled(arrays):
        n = max(len(a) for a in arrays)
        acc = np.zeros(n)
        for a, wi in zip(arrays, w):
            acc[: len(a)] += a * wi
        return acc / W

    return TraceMetrics(
        k=k,
        time_avg_N=float(np.dot(w, [r.time_avg_N for r in runs]) / W),
        time_avg_I=float(np.dot(w, [r.time_avg_I for r in runs]) / W),
        occupancy_histogram=pooled([r.occupancy_histogram for r in runs]),
        n_time=pooled([r.n_time for r in runs]),
        idle_by_n=pooled([r.idle_by_n for r in runs]),
        ssc_sup=max(r.ssc_sup for r in runs),
        spread_gt2_fraction=float(np.dot(w, [r.spread_gt2_fraction for r in runs]) / W),
        event_count=sum(r.event_count for r in runs),
        arrivals=sum(r.arrivals for r in runs),
        measured_time=float(W),
        transient=any(r.transient for r in runs),
        warmup_fraction=runs[0].warmup_fraction,
        meta={"merged": len(runs), **{k_: v for k_, v in runs[0].meta.items() if k_ not in ("seed", "stream_id")}},
    )


def expected_idle_given(n_hat: float) -> float:
    """Leading-order conditional idle mean ``(2 - n)+ / (n - 1)`` for ``n > 1``."""
    if n_hat <= 1.0:
        return math.inf
    return max(2.0 - n_hat, 0.0) / (n_hat - 1.0)
