"""Data grids behind the figures.

=========  ================================================================
fig1       jsq, k in {4, 16, 64}, E[N]/k against theta = rho^k, plus the
           limit mean at alpha = -ln theta
fig2a      the same for iqf (limit 1 + 2/alpha)
fig2b      the same for i1f (limit: the jsq mean)
fig3       limit ratios jsq/cq and iqf/cq against theta = e^-alpha
fig4a      simulated iqf/jsq ratio against theta, with the limit ratio
fig4b      simulated i1f/jsq ratio against theta, with the limit ratio
fig5a      processor sharing, k = 4, rho = 0.9
fig5b      processor sharing, k in {64, 256}, alpha = 0.4
fig5c      processor sharing, k = 2, rho in {0.975, 0.99}
fig5d      processor sharing, k in {64, 256}, rho = 1 - 0.5/sqrt(k)
=========  ================================================================

The fig5 grids cover the six job-size presets and the jsq, lwl and random
policies.  Limit curves appear as rows with ``k = inf`` and discipline
``nds-limit``; ratio rows carry a policy such as ``iqf/jsq`` and the ratio
in the ``EN_per_k`` column.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..diffusion import mean_of
from ..distributions import PRESETS
from .config import ExperimentConfig, GridPoint
from .runner import Row, run_experiment, run_point
from .stats import batch_means

__all__ = ["FIGURES", "reproduce", "figure_config", "UnknownFigureError", "THETA_GRID"]

THETA_GRID = tuple(np.round(np.arange(0.05, 0.951, 0.1), 10))
PS_DISTS = tuple(PRESETS)
PS_POLICIES = ("jsq", "lwl", "random")

DESK_REPS = 10
DESK_ARRIVALS = 1_000_000


class UnknownFigureError(KeyError):
    pass


def _theta_rhos(k: int) -> list[float]:
    return [float(t ** (1.0 / k)) for t in THETA_GRID]


def _limit_rows(figure: str, policy: str, limit_policy: str) -> list[Row]:
    rows = []
    for t in THETA_GRID:
        a = -math.log(t)
        rows.append(Row(figure, "inf", a, None, policy, "nds-limit", "", None,
                        mean_of(limit_policy, a), None, None, None))
    return rows


def _theta_sweep(figure, policy, limit_policy, reps, arrivals, seed):
    rows = []
    for k in (4, 16, 64):
        cfg = ExperimentConfig(figure, [k], [policy], rhos=_theta_rhos(k), replications=reps,
                               arrivals_per_rep=arrivals, seed_base=seed)
        rows += run_experiment(cfg, figure)
    return rows + _limit_rows(figure, policy, limit_policy)


def _ratio_sweep(figure, num, den, reps, arrivals, seed):
    rows = []
    for k in (4, 16, 64):
        for rho in _theta_rhos(k):
            per = {}
            for pol in (num, den):
                pt = GridPoint(k, None, rho, pol, "fifo", "exp")
                per[pol] = run_point(pt, reps, arrivals, seed)
            # replications share random streams, so the ratio is formed per replication
            ratio = per[num][:, 0] / per[den][:, 0]
            s = batch_means(ratio)
            rows.append(Row(figure, k, k * (1 - rho), rho, f"{num}/{den}", "fifo", "exp", seed,
                            s.estimate, None, None, s.ci_halfwidth))
    for t in THETA_GRID:
        a = -math.log(t)
        rows.append(Row(figure, "inf", a, None, f"{num}/{den}", "nds-limit", "", None,
                        mean_of(num, a) / mean_of(den, a), None, None, None))
    return rows


def _fig3(reps, arrivals, seed):
    rows = []
    for t in np.round(np.arange(0.01, 0.995, 0.01), 10):
        a = -math.log(t)
        for num in ("jsq", "iqf"):
            rows.append(Row("fig3", "inf", a, None, f"{num}/cq", "nds-limit", "", None,
                            mean_of(num, a) / mean_of("cq", a), None, None, None))
    return rows


def figure_config(figure_id: str, reps: int = DESK_REPS, arrivals: int = DESK_ARRIVALS,
                  seed: int = 1) -> Optional[ExperimentConfig]:
    """The simulation grid of a fig5 panel as an :class:`ExperimentConfig`."""
    common = dict(policies=PS_POLICIES, disciplines=("ps",), dists=PS_DISTS, replications=reps,
                  arrivals_per_rep=arrivals, seed_base=seed)
    if figure_id == "fig5a":
        return ExperimentConfig("fig5a", [4], rhos=[0.9], **common)
    if figure_id == "fig5b":
        return ExperimentConfig("fig5b", [64, 256], alphas=[0.4], **common)
    if figure_id == "fig5c":
        return ExperimentConfig("fig5c", [2], rhos=[0.975, 0.99], **common)
    return None


def _fig5d(reps, arrivals, seed):
    rows = []
    for k in (64, 256):
        cfg = ExperimentConfig("fig5d", [k], rhos=[1 - 0.5 / math.sqrt(k)], policies=PS_POLICIES,
                               disciplines=("ps",), dists=PS_DISTS, replications=reps,
                               arrivals_per_rep=arrivals, seed_base=seed)
        rows += run_experiment(cfg, "fig5d")
    return rows


FIGURES = {
    "fig1": lambda r, n, s: _theta_sweep("fig1", "jsq", "jsq", r, n, s),
    "fig2a": lambda r, n, s: _theta_sweep("fig2a", "iqf", "iqf", r, n, s),
    "fig2b": lambda r, n, s: _theta_sweep("fig2b", "i1f", "jsq", r, n, s),
    "fig3": _fig3,
    "fig4a": lambda r, n, s: _ratio_sweep("fig4a", "iqf", "jsq", r, n, s),
    "fig4b": lambda r, n, s: _ratio_sweep("fig4b", "i1f", "jsq", r, n, s),
    "fig5a": lambda r, n, s: run_experiment(figure_config("fig5a", r, n, s)),
    "fig5b": lambda r, n, s: run_experiment(figure_config("fig5b", r, n, s)),
    "fig5c": lambda r, n, s: run_experiment(figure_config("fig5c", r, n, s)),
    "fig5d": _fig5d,
}


def reproduce(figure_id: str, reps: int = DESK_REPS, arrivals: int = DESK_ARRIVALS, seed: int = 1):
    """Rows and metadata for one figure.  ``fig3`` is analytic; the rest simulate."""
    try:
        recipe = FIGURES[figure_id]
    except KeyError:
        raise UnknownFigureError(f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}") from None
    rows = recipe(reps, arrivals, seed)
    meta = {
        "figure": figure_id,
        "replications": reps if figure_id != "fig3" else 0,
        "arrivals_per_rep": arrivals if figure_id != "fig3" else 0,
        "seed_base": seed,
        "warmup_fraction": 0.2,
        "mu": 1.0,
    }
    return rows, meta
