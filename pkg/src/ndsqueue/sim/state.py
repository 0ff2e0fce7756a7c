from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..distributions import (
    Exponential,
    ParameterError,
    ServiceDistribution,
    get_distribution,
)
from ..policies import Policy, parse_policy

__all__ = [
    "SimConfig",
    "SystemState",
    "Trace",
    "TraceMetrics",
    "EngineMismatchError",
    "EmptyHorizonError",
    "StabilityWarning",
    "balanced_levels",
]


class EngineMismatchError(ValueError):
    """The configuration cannot be run by the requested engine."""


class EmptyHorizonError(ValueError):
    """A run was asked to simulate zero arrivals."""


class StabilityWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    Servers work at unit rate; job sizes follow ``service_dist`` (exponential
    with rate ``mu`` when omitted).  ``horizon_arrivals`` counts all arrivals,
    the first ``warmup_fraction`` of which are discarded from the metrics.
    ``record_every`` > 0 keeps every n-th post-warmup event in a :class:`Trace`.
    ``check_every`` > 0 asserts the state invariants every n-th event.
    """

    k: int
    lam: float
    mu: float = 1.0
    service_dist: Optional[ServiceDistribution | str] = None
    discipline: str = "fifo"
    policy: Policy | str = "jsq"
    horizon_arrivals: int = 1_000_000
    warmup_fraction: float = 0.2
    seed: int = 0
    stream_id: int = 0
    initial_jobs: Optional[int] = None
    record_every: int = 0
    check_every: int = 0

    def __post_init__(self):
        if int(self.k) < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not (self.lam > 0):
            raise ParameterError(f"arrival rate must be positive, got {self.lam}")
        if not (self.mu > 0):
            raise ParameterError(f"mu must be positive, got {self.mu}")
        if not (0.0 <= self.warmup_fraction < 1.0):
            raise ParameterError("warmup_fraction must lie in [0, 1)")
        if self.discipline not in ("fifo", "ps"):
            raise ParameterError(f"discipline must be 'fifo' or 'ps', got {self.discipline!r}")
        if self.horizon_arrivals < 0:
            raise ParameterError("horizon_arrivals must be nonnegative")
        object.__setattr__(self, "policy", parse_policy(self.policy))
        if self.service_dist is None:
            object.__setattr__(self, "service_dist", Exponential(self.mu))
        else:
            dist = get_distribution(self.service_dist)
            if isinstance(dist, Exponential) and not math.isclose(dist.rate, self.mu) and self.mu != 1.0:
                raise ParameterError("mu disagrees with the exponential service rate")
            object.__setattr__(self, "service_dist", dist)

    @classmethod
    def nds(cls, k: int, alpha: float, mu: float = 1.0, **kw) -> "SimConfig":
        """Non-degenerate slowdown scaling: ``lam = (k - alpha) * mu``."""
        if not (0 < alpha < k):
            raise ParameterError(f"need 0 < alpha < k, got alpha={alpha}, k={k}")
        return cls(k=k, lam=(k - alpha) * mu, mu=mu, **kw)

    @classmethod
    def at_load(cls, k: int, rho: float, mu: float = 1.0, **kw) -> "SimConfig":
        return cls(k=k, lam=rho * k * mu, mu=mu, **kw)

    @property
    def service_rate(self) -> float:
        """Completion rate of a busy server (1 / mean job size)."""
        return 1.0 / self.service_dist.moments()[0]

    @property
    def rho(self) -> float:
        return self.lam / (self.k * self.service_rate)

    @property
    def stable(self) -> bool:
        return self.rho < 1.0

    @property
    def warmup_arrivals(self) -> int:
        return int(self.horizon_arrivals * self.warmup_fraction)

    @property
    def start_jobs(self) -> int:
        if self.initial_jobs is not None:
            return int(self.initial_jobs)
        return int(math.ceil(min(self.rho, 1.0) * self.k))

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def balanced_levels(k: int, n_jobs: int, central: bool = False) -> tuple[np.ndarray, int]:
    """Level counts of the balanced state with ``n_jobs`` jobs.

    With a central buffer at most one job sits at each server and the rest
    wait centrally.
    """
    if central:
        busy = min(n_jobs, k)
        M = np.zeros(4, dtype=np.int64)
        M[0], M[1] = k - busy, busy
        return M, n_jobs - busy
    q, r = divmod(n_jobs, k)
    M = np.zeros(q + 4, dtype=np.int64)
    M[q] = k - r
    M[q + 1] += r
    return M, 0


@dataclass
class SystemState:
    """Instantaneous state of the k servers.

    ``level_counts[l]`` is the number of servers holding ``l`` jobs.
    ``per_server`` (event-driven engine only) lists the residual work of
    every job at each server.
    """

    level_counts: np.ndarray
    total_jobs: int
    central_buffer: int = 0
    per_server: Optional[list[np.ndarray]] = None

    @property
    def k(self) -> int:
        return int(self.level_counts.sum())

    @property
    def idle(self) -> int:
        return int(self.level_counts[0])

    def m(self, level: int) -> int:
        return int(self.level_counts[level]) if level < len(self.level_counts) else 0

    def m_at_least(self, level: int) -> int:
        return int(self.level_counts[level:].sum())

    def jobs_above(self, level: int) -> int:
        """Jobs stacked above ``level`` in each queue (N_{>=level+1} in box terms)."""
        lev = np.arange(len(self.level_counts))
        return int(np.sum(np.clip(lev - level, 0, None) * self.level_counts))

    def unfinished_work(self) -> Optional[np.ndarray]:
        if self.per_server is None:
            return None
        return np.array([w.sum() for w in self.per_server])

    def check(self) -> None:
        M = self.level_counts
        if np.any(M < 0) or self.central_buffer < 0:
            raise AssertionError("negative counts in state")
        n = int(np.dot(np.arange(len(M)), M)) + self.central_buffer
        if n != self.total_jobs:
            raise AssertionError(f"N={self.total_jobs} but levels hold {n}")
        if self.central_buffer > 0 and M[0] > 0:
            raise AssertionError("idle server while jobs wait centrally")


@dataclass
class Trace:
    """Event-sampled path: time, N, I, M_1 and M_{>=3} (servers with 3+ jobs)."""

    k: int
    time: np.ndarray
    total_jobs: np.ndarray
    idle: np.ndarray
    m1: np.ndarray
    m_ge3: np.ndarray

    def __len__(self) -> int:
        return len(self.time)

    def to_csv(self, path, every: int = 1) -> None:
        sl = slice(None, None, max(1, int(every)))
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "N", "I", "M_1", "M_ge3"])
            for row in zip(self.time[sl], self.total_jobs[sl], self.idle[sl], self.m1[sl], self.m_ge3[sl]):
                w.writerow([repr(float(row[0]))] + [int(x) for x in row[1:]])


@dataclass
class TraceMetrics:
    """Time-weighted summary of the post-warmup part of one run.

    ``n_time[n]`` is the fraction of time with exactly ``n`` jobs in the
    system and ``idle_by_n[n]`` the time integral of the idle count while
    ``N == n`` (normalised by total measured time), which is enough to form
    conditional idle means over any binning of N/k.
    """

    k: int
    time_avg_N: float
    time_avg_I: float
    occupancy_histogram: np.ndarray
    n_time: np.ndarray
    idle_by_n: np.ndarray
    ssc_sup: float
    spread_gt2_fraction: float
    event_count: int
    arrivals: int
    measured_time: float
    transient: bool = False
    warmup_fraction: float = 0.0
    final_state: Optional[SystemState] = None
    trace: Optional[Trace] = None
    meta: dict = field(default_factory=dict)

    @property
    def mean_per_server(self) -> float:
        return self.time_avg_N / self.k

    def ccdf_of_N_over_k(self) -> tuple[np.ndarray, np.ndarray]:
        """Grid ``n/k`` and ``P(N > n)`` for ``n = 0, 1, ...``."""
        p = self.n_time
        ccdf = np.clip(1.0 - np.cumsum(p), 0.0, None)
        return np.arange(len(p)) / self.k, ccdf

    def ccdf_at(self, x) -> np.ndarray:
        """``P(N/k > x)`` at the points ``x``."""
        grid, ccdf = self.ccdf_of_N_over_k()
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # P(N > xk) = P(N > floor(xk))
        idx = np.floor(x * self.k + 1e-9).astype(int)
        out = np.where(idx < len(ccdf), ccdf[np.clip(idx, 0, len(ccdf) - 1)], 0.0)
        return np.where(idx < 0, 1.0, out)

    def warn_if_transient(self) -> None:
        if self.transient:
            warnings.warn("configuration is not stable; metrics describe a transient", StabilityWarning)
