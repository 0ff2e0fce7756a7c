"""Comparisons between policies: mean ratios, dominance, and the po-d tail."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..distributions import ParameterError
from .stationary import StationaryDensity, mean_of

__all__ = ["RatioResult", "ratio_sup", "mean_ratio", "pod_meanfield_tail", "DominanceResult",
           "check_stochastic_dominance"]

ALPHA_RANGE = (1e-4, 50.0)


@dataclass(frozen=True)
class RatioResult:
    alpha_star: float
    sup_ratio: float
    unimodal: bool
    grid_max: float  # largest ratio seen on the search grid

    def __iter__(self):
        # lets callers write ``alpha_star, sup = ratio_sup(...)``
        return iter((self.alpha_star, self.sup_ratio))


def mean_ratio(policy_num: str, policy_den: str, alpha):
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    out = np.array([mean_of(policy_num, x) / mean_of(policy_den, x) for x in a])
    return float(out[0]) if np.ndim(alpha) == 0 else out


def ratio_sup(policy_num: str, policy_den: str, n_grid: int = 200, dense: int = 20001) -> RatioResult:
    """Maximise ``mean_num(alpha) / mean_den(alpha)`` over ``alpha`` in [1e-4, 50].

    A log-spaced grid brackets the maximum, then golden-section search
    refines it.  If the grid shows more than one interior local maximum the
    answer comes from a dense grid instead.
    """
    lo, hi = ALPHA_RANGE
    grid = np.geomspace(lo, hi, n_grid)
    r = mean_ratio(policy_num, policy_den, grid)
    span = r.max() - r.min()
    if span < 1e-12:
        return RatioResult(float(grid[0]), float(r[0]), True, float(r.max()))

    interior = (r[1:-1] > r[:-2]) & (r[1:-1] >= r[2:])
    unimodal = int(interior.sum()) <= 1
    if not unimodal:
        g = np.geomspace(lo, hi, dense)
        rd = mean_ratio(policy_num, policy_den, g)
        j = int(np.argmax(rd))
        return RatioResult(float(g[j]), float(rd[j]), False, float(rd.max()))

    j = int(np.argmax(r))
    if j == 0 or j == len(grid) - 1:
        # supremum at an end of the range (e.g. approached as alpha -> 0)
        return RatioResult(float(grid[j]), float(r[j]), True, float(r[j]))
    # golden section on log(alpha) inside the bracketing cell
    f = lambda u: -mean_ratio(policy_num, policy_den, math.exp(u))
    res = optimize.minimize_scalar(
        f, bracket=(math.log(grid[j - 1]), math.log(grid[j]), math.log(grid[j + 1])),
        method="golden", tol=1e-12,
    )
    a_star = math.exp(res.x)
    return RatioResult(a_star, -float(res.fun), True, float(r.max()))


def pod_meanfield_tail(rho: float, level: int, d: int = 2) -> float:
    """Mean-field fraction of queues holding at least ``level`` jobs under po-d.

    ``rho ** ((d**level - 1) / (d - 1))``; for d = 2 this is
    ``rho ** (2**level - 1)``, far lighter than the geometric ``rho ** level``.
    """
    if not (0.0 < rho < 1.0):
        raise ParameterError(f"rho must lie in (0, 1), got {rho}")
    if int(level) != level or level < 1:
        raise ParameterError(f"level must be a positive integer, got {level}")
    if int(d) != d or d < 2:
        raise ParameterError(f"d must be an integer >= 2, got {d}")
    level, d = int(level), int(d)
    return rho ** ((d**level - 1) // (d - 1))


@dataclass(frozen=True)
class DominanceResult:
    holds: bool
    max_violation: float

    def __bool__(self) -> bool:
        return self.holds


def check_stochastic_dominance(density_a: StationaryDensity, density_b: StationaryDensity,
                               grid=None, tol: float = 1e-9) -> DominanceResult:
    """Test ``a <=_st b``: ``P_a(X > x) <= P_b(X > x) + tol`` on every grid point."""
    if grid is None:
        grid = np.linspace(1.0, 40.0, 2000)
    grid = np.asarray(grid, dtype=float)
    diff = np.asarray(density_a.ccdf(grid)) - np.asarray(density_b.ccdf(grid))
    worst = float(max(diff.max(), 0.0))
    return DominanceResult(worst <= tol, worst)
