"""Replication statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

__all__ = ["SummaryStats", "batch_means"]


@dataclass(frozen=True)
class SummaryStats:
    estimate: float
    ci_halfwidth: Optional[float]  # None when there is a single replication
    n_reps: int
    warmup_fraction: float = 0.0
    confidence: float = 0.95

    @property
    def has_ci(self) -> bool:
        return self.ci_halfwidth is not None

    @property
    def interval(self) -> tuple[float, float]:
        hw = self.ci_halfwidth if self.ci_halfwidth is not None else math.nan
        return self.estimate - hw, self.estimate + hw

    def covers(self, value: float) -> bool:
        lo, hi = self.interval
        return bool(lo <= value <= hi)


def batch_means(values: Sequence[float], confidence: float = 0.95, warmup_fraction: float = 0.0) -> SummaryStats:
    """Mean of per-replication estimates with a Student-t interval.

    Each replication is one batch.  With a single replication the estimate
    is returned and the interval is marked unavailable.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("need at least one replication")
    if not np.all(np.isfinite(x)):
        raise ValueError("replication estimates must be finite")
    est = float(x.mean())
    n = len(x)
    if n < 2:
        return SummaryStats(est, None, n, warmup_fraction, confidence)
    sd = float(x.std(ddof=1))
    hw = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1)) * sd / math.sqrt(n)
    return SummaryStats(est, hw, n, warmup_fraction, confidence)
