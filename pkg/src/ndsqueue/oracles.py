"""Exact reference computations used to check the simulators.

Birth-death hitting probabilities, the M/M/k stationary law, M/M/1
excursion statistics and a Poisson tail bound.  Each one comes with an
independent second route (a linear solve, detailed balance, Monte Carlo or
the exact CDF) so tests can compare the two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, special, stats

from .diffusion.drift import DomainError
from .distributions import ParameterError, RandomStream

__all__ = [
    "BirthDeathChain",
    "InternalConsistencyError",
    "hitting_probability",
    "hitting_probability_linear",
    "mmk_stationary",
    "mmk_mean",
    "detailed_balance_residual",
    "ExcursionStats",
    "excursion_tail_bound",
    "excursion_area_center",
    "simulate_excursions",
    "poisson_tail_bound",
    "poisson_tail_exact",
]


class InternalConsistencyError(ArithmeticError):
    """Two routes to the same exact quantity disagree."""


# --- birth-death hitting probabilities ---------------------------------------------


@dataclass(frozen=True)
class BirthDeathChain:
    """Chain on {0..x}: ``up[n]`` is the rate n -> n+1 for n < x and
    ``down[n-1]`` the rate n -> n-1 for n >= 1."""

    x: int
    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.up, dtype=float)
        down = np.asarray(self.down, dtype=float)
        if int(self.x) < 1:
            raise ParameterError("the top state must be at least 1")
        if up.shape != (self.x,) or down.shape != (self.x,):
            raise ParameterError(f"need {self.x} up rates (states 0..x-1) and {self.x} down rates (1..x)")
        if np.any(up <= 0) or np.any(down <= 0) or not np.all(np.isfinite(up + down)):
            raise ParameterError("rates must be positive and finite")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @classmethod
    def constant(cls, x: int, f: float, g: float) -> "BirthDeathChain":
        return cls(x, np.full(x, float(f)), np.full(x, float(g)))

    def f(self, n: int) -> float:
        return float(self.up[n])

    def g(self, n: int) -> float:
        return float(self.down[n - 1])


def hitting_probability_linear(chain: BirthDeathChain) -> float:
    """P(hit x before 0 | start at 1) from the first-step equations."""
    x = chain.x
    if x == 1:
        return 1.0
    # unknowns h(1..x-1); h(0) = 0, h(x) = 1.  The system is assembled in
    # extended precision because f + g rounded to double already perturbs
    # the answer by more than 1e-12 on badly conditioned chains.
    m = x - 1
    A = np.zeros((m, m), dtype=np.longdouble)
    b = np.zeros(m, dtype=np.longdouble)
    up, down = chain.up.astype(np.longdouble), chain.down.astype(np.longdouble)
    for n in range(1, x):
        f, g = up[n], down[n - 1]
        r = n - 1
        A[r, r] = f + g
        if r + 1 < m:
            A[r, r + 1] = -f
        else:
            b[r] += f
        if r >= 1:
            A[r, r - 1] = -g
    lu = linalg.lu_factor(A.astype(float))
    h = linalg.lu_solve(lu, b.astype(float)).astype(np.longdouble)
    # iterative refinement with residuals in extended precision
    for _ in range(3):
        resid = b - A @ h
        h = h + linalg.lu_solve(lu, resid.astype(float)).astype(np.longdouble)
    return float(h[0])


def hitting_probability(chain: BirthDeathChain, check: bool = True, tol: float = 1e-12) -> float:
    """P(hit x before 0 | start at 1) = 1 / sum_{n=1}^{x} prod_{m=1}^{n-1} g(m)/f(m).

    With ``check`` the first-step linear system is solved as well and an
    :class:`InternalConsistencyError` raised if the two differ by more than
    ``tol``.
    """
    ratios = chain.down[: chain.x - 1] / chain.up[1: chain.x]  # g(m)/f(m), m = 1..x-1
    log_terms = np.concatenate([[0.0], np.cumsum(np.log(ratios))])
    value = float(np.exp(-special.logsumexp(log_terms)))
    if check:
        other = hitting_probability_linear(chain)
        if abs(other - value) > tol:
            raise InternalConsistencyError(f"formula gives {value!r}, linear solve {other!r}")
    return value


# --- M/M/k ------------------------------------------------------------------------


def _check_stable(lam: float, mu: float, k: int) -> None:
    if not (lam > 0 and mu > 0 and k >= 1):
        raise ParameterError("need lam > 0, mu > 0, k >= 1")
    if lam >= k * mu:
        raise ParameterError(f"unstable: lam={lam} >= k*mu={k * mu}")


def mmk_mean(lam: float, mu: float, k: int) -> float:
    """Exact mean number in an M/M/k system (Erlang C), computed in log space."""
    _check_stable(lam, mu, k)
    a = lam / mu
    rho = a / k
    n = np.arange(k)
    log_terms = n * math.log(a) - special.gammaln(n + 1)
    log_top = k * math.log(a) - special.gammaln(k + 1) - math.log1p(-rho)
    log_c = log_top - np.logaddexp(special.logsumexp(log_terms), log_top)
    return a + math.exp(log_c) * rho / (1.0 - rho)


def mmk_stationary(lam: float, mu: float, k: int, cap: int | None = None):
    """Stationary law of the M/M/k queue on {0..cap} and its exact mean.

    Probabilities come from the detailed-balance recursion in log space, so
    large k do not overflow.  Without ``cap`` the support is cut where the
    remaining (geometric) tail mass drops below 1e-12.  The returned mean is
    the exact Erlang-C value, not the truncated sum.
    """
    _check_stable(lam, mu, k)
    rho = lam / (k * mu)
    if cap is None:
        cap = k + 50
        # tail beyond cap is pi(cap) * rho / (1 - rho) <= rho^(cap-k) / (1 - rho)
        while cap < 10**8:
            extra = cap - k
            if extra * math.log(rho) - math.log1p(-rho) < math.log(1e-12) - 5:
                break
            cap = k + 2 * extra
    n = np.arange(1, cap + 1)
    log_ratio = math.log(lam) - np.log(mu * np.minimum(n, k))
    log_p = np.concatenate([[0.0], np.cumsum(log_ratio)])
    log_p -= special.logsumexp(log_p)
    return np.exp(log_p), mmk_mean(lam, mu, k)


def detailed_balance_residual(pi: np.ndarray, lam: float, mu: float, k: int) -> float:
    """Largest relative gap in ``pi(n) lam = pi(n+1) mu min(n+1, k)``."""
    pi = np.asarray(pi, dtype=float)
    n = np.arange(len(pi) - 1)
    lhs = pi[:-1] * lam
    rhs = pi[1:] * mu * np.minimum(n + 1, k)
    scale = np.maximum(np.abs(lhs), 1e-300)
    ok = lhs > 1e-290  # ignore underflowed entries deep in the tail
    return float(np.max(np.abs(lhs - rhs)[ok] / scale[ok])) if np.any(ok) else 0.0


# --- M/M/1 excursions ---------------------------------------------------------------


@dataclass(frozen=True)
class ExcursionStats:
    """M/M/1 queue with arrival rate ``arrival`` and service rate ``service``."""

    arrival: float
    service: float

    def __post_init__(self):
        if not (self.arrival > 0):
            raise ParameterError("arrival rate must be positive")
        if not (self.service > self.arrival):
            raise ParameterError("need service > arrival for finite excursions")

    def phi(self, theta):
        """Log moment generating function of the net jump rate."""
        th = np.asarray(theta, dtype=float)
        out = self.arrival * np.expm1(th) + self.service * np.expm1(-th)
        return float(out) if out.ndim == 0 else out

    @property
    def theta_star(self) -> float:
        return 0.5 * math.log(self.service / self.arrival)

    @property
    def phi_min(self) -> float:
        """``phi(theta*) = -(sqrt(service) - sqrt(arrival))**2``."""
        return -((math.sqrt(self.service) - math.sqrt(self.arrival)) ** 2)


def excursion_tail_bound(stats_: ExcursionStats, t, squared: bool = True):
    """Bound on P(excursion length >= t): ``sqrt(b/a) exp(-(sqrt b - sqrt a)^2 t)``.

    ``squared=False`` gives the variant with exponent ``(sqrt b - sqrt a) t``.
    """
    a, b = stats_.arrival, stats_.service
    gap = math.sqrt(b) - math.sqrt(a)
    rate = gap * gap if squared else gap
    tt = np.asarray(t, dtype=float)
    out = math.sqrt(b / a) * np.exp(-rate * tt)
    return float(out) if out.ndim == 0 else out


def excursion_area_center(stats_: ExcursionStats, form: str = "stationary") -> float:
    """Constant ``c`` that makes ``int (Q - c) ds`` over an excursion mean zero.

    ``"stationary"`` is ``a / (b - a)``, the stationary mean queue length,
    which is what renewal-reward gives.  ``"negated"`` returns ``a / (a - b)``
    for comparison; it is negative whenever the queue is stable.
    """
    a, b = stats_.arrival, stats_.service
    if form == "stationary":
        return a / (b - a)
    if form == "negated":
        return a / (a - b)
    raise ValueError(f"unknown form {form!r}")


@dataclass
class ExcursionSample:
    lengths: np.ndarray
    areas: np.ndarray  # integral of Q over each excursion

    def centred_areas(self, c: float) -> np.ndarray:
        return self.areas - c * self.lengths

    def tail(self, t) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        srt = np.sort(self.lengths)
        return 1.0 - np.searchsorted(srt, tt, side="left") / len(srt)


def simulate_excursions(stats_: ExcursionStats, n_excursions: int, stream: RandomStream | None = None) -> ExcursionSample:
    """Monte Carlo renewal cycles of the M/M/1 queue.

    A cycle runs from one entrance of the empty state to the next (an idle
    period followed by a busy period).  Paths come from the CTMC engine with
    one server.
    """
    from .sim import SimConfig, run_ctmc

    a, b = stats_.arrival, stats_.service
    stream = stream or RandomStream(0)
    # a cycle holds b / (b - a) arrivals on average
    horizon = int(n_excursions * b / (b - a) * 1.05) + 1000
    while True:
        cfg = SimConfig(k=1, lam=a, mu=b, policy="cq", horizon_arrivals=horizon,
                        warmup_fraction=0.0, initial_jobs=0, record_every=1)
        tr = run_ctmc(cfg, stream).trace
        if np.count_nonzero(tr.total_jobs == 0) >= n_excursions:
            break
        horizon *= 2
    t = np.concatenate([[0.0], tr.time])
    N = np.concatenate([[0], tr.total_jobs])
    dt = np.diff(t)
    q_area = N[:-1] * dt
    ends = np.flatnonzero(N[1:] == 0)  # event index that closes a cycle
    ends = ends[:n_excursions]
    cum_t = np.concatenate([[0.0], np.cumsum(dt)])
    cum_a = np.concatenate([[0.0], np.cumsum(q_area)])
    bounds = np.concatenate([[0], ends + 1])
    return ExcursionSample(np.diff(cum_t[bounds]), np.diff(cum_a[bounds]))


# --- Poisson tails -------------------------------------------------------------------


def poisson_tail_bound(mean: float, x: float) -> float:
    """``exp(-x - mean)``, a bound on P(Poisson(mean) >= x) valid for x >= mean e^2."""
    if not (mean > 0):
        raise ParameterError("mean must be positive")
    if x < mean * math.e**2:
        raise DomainError(f"bound needs x >= mean*e^2 = {mean * math.e ** 2:.6g}, got x={x}")
    return math.exp(-x - mean)


def poisson_tail_exact(mean: float, x: float) -> float:
    """P(Poisson(mean) >= x)."""
    return float(stats.poisson.sf(math.ceil(x) - 1, mean))
