"""Running parameter grids and writing result tables.

Replication ``r`` of every grid point uses ``RandomStream(seed_base, r)``,
so grid points share random numbers replication by replication and any row
can be re-run on its own.  Work units run inline by default; set
``NDSLB_WORKERS`` to use a process pool.  Rows are sorted before output, so
the table does not depend on the worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ..distributions import RandomStream
from ..sim import SimConfig, StabilityWarning, simulate
from .config import ExperimentConfig, GridPoint
from .stats import batch_means

__all__ = ["COLUMNS", "Row", "run_experiment", "run_point", "write_rows", "rows_to_csv", "worker_count"]

COLUMNS = ["figure", "k", "alpha", "rho", "policy", "discipline", "dist", "seed",
           "EN_per_k", "EI", "ssc_sup", "ci_halfwidth"]

WORKERS_ENV = "NDSLB_WORKERS"


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{float(x):.10g}"


@dataclass(frozen=True)
class Row:
    figure: str
    k: object  # int, or "inf" for limit curves
    alpha: Optional[float]
    rho: Optional[float]
    policy: str
    discipline: str
    dist: str
    seed: Optional[int]
    EN_per_k: float
    EI: Optional[float]
    ssc_sup: Optional[float]
    ci_halfwidth: Optional[float]
    transient: bool = False

    def cells(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in COLUMNS]

    def sort_key(self):
        k = math.inf if self.k == "inf" else float(self.k)
        return (self.figure, k, self.discipline, self.policy, self.dist,
                self.alpha if self.alpha is not None else -1.0,
                self.rho if self.rho is not None else -1.0)


# one replication of one grid point; module level so process pools can pickle it
def _run_unit(args):
    point, rep, arrivals, seed_base, warmup, engine = args
    cfg = SimConfig(k=point.k, lam=point.lam, service_dist=point.dist, discipline=point.discipline,
                    policy=point.policy, horizon_arrivals=arrivals, warmup_fraction=warmup,
                    seed=seed_base, stream_id=rep)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StabilityWarning)
        m = simulate(cfg, engine=engine, stream=RandomStream(seed_base, rep))
    return m.mean_per_server, m.time_avg_I, m.ssc_sup


def _map(units):
    n = worker_count()
    if n <= 1 or len(units) <= 1:
        return [_run_unit(u) for u in units]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_unit, units, chunksize=1))


def run_point(point: GridPoint, replications: int, arrivals: int, seed_base: int,
              warmup: float = 0.2, engine: str = "auto") -> np.ndarray:
    """Per-replication ``(E[N]/k, E[I], ssc_sup)`` for one grid point."""
    units = [(point, r, arrivals, seed_base, warmup, engine) for r in range(replications)]
    return np.array(_map(units))


def summarise(figure: str, point: GridPoint, reps: np.ndarray, seed_base: int, warmup: float) -> Row:
    en = batch_means(reps[:, 0], warmup_fraction=warmup)
    return Row(figure, point.k, point.spare, point.load, point.policy, point.discipline, point.dist,
               seed_base, en.estimate, float(reps[:, 1].mean()), float(reps[:, 2].max()),
               en.ci_halfwidth, transient=not point.stable)


def run_experiment(cfg: ExperimentConfig, figure: Optional[str] = None) -> list[Row]:
    """One row per grid point: E[N]/k with its 95% CI, mean idle count, SSC sup."""
    points = cfg.grid()
    units = [(p, r, cfg.arrivals_per_rep, cfg.seed_base, cfg.warmup_fraction, cfg.engine)
             for p in points for r in range(cfg.replications)]
    results = _map(units)
    rows = []
    for i, p in enumerate(points):
        block = np.array(results[i * cfg.replications:(i + 1) * cfg.replications])
        rows.append(summarise(figure or cfg.experiment_id, p, block, cfg.seed_base, cfg.warmup_fraction))
    return sorted(rows, key=Row.sort_key)


def rows_to_csv(rows: Iterable[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in sorted(rows, key=Row.sort_key):
        w.writerow(r.cells())
    return buf.getvalue()


def write_rows(rows: list[Row], path, metadata: Optional[dict] = None) -> None:
    """Write the CSV and, next to it, ``<path>.json`` with run metadata."""
    text = rows_to_csv(rows)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    meta = dict(metadata or {})
    meta["transient_rows"] = [i for i, r in enumerate(sorted(rows, key=Row.sort_key)) if r.transient]
    with open(f"{path}.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
