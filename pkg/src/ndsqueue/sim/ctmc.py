"""Continuous-time Markov chain engine for exponential job sizes.

The chain lives on level counts ``M[l]``; no per-server identities are kept.
Every event draws an exponential holding time with total rate
``lam + mu * busy`` and one uniform that both picks the event type and, for a
departure, the busy server (hence its level) that completes.
"""
from __future__ import annotations

import numba
import numpy as np

from ..distributions import Exponential, RandomStream
from ..policies import CQ, choose_level
from . import _common as c
from ._common import (
    ACC_I, ACC_N, ACC_SPREAD, ACC_SSC, ACC_T, DONE, GROW_JOBS, GROW_LEVELS,
    S_ARR, S_BUF, S_EV, S_MAX, S_MEAS, S_MIN, S_N, S_REC,
    Workspace, check_levels, observe_ssc, record,
)
from .state import (
    EmptyHorizonError,
    EngineMismatchError,
    SimConfig,
    SystemState,
    Trace,
    TraceMetrics,
    balanced_levels,
)

__all__ = ["run_ctmc"]


@numba.njit(cache=True)
def _ctmc_kernel(k, lam, mu, code, param, n_arr, n_warm, gen, rec_every, check_every,
                 st, clock, acc, M, occ, last, scratch, tN, tI,
                 rec_t, rec_n, rec_i, rec_m1, rec_m3):
    # Runs until the horizon or until an array is about to overflow; in the
    # latter case returns a nonzero code and the caller grows and resumes.
    N = st[S_N]
    buf = st[S_BUF]
    minlev = st[S_MIN]
    maxlev = st[S_MAX]
    arrivals = st[S_ARR]
    events = st[S_EV]
    measuring = st[S_MEAS] == 1
    nrec = st[S_REC]
    t = clock[0]
    is_cq = code == CQ
    status = DONE
    L = len(M)
    cap = len(tN)

    while arrivals < n_arr:
        if maxlev + 2 >= L:
            status = GROW_LEVELS
            break
        if N + 1 >= cap:
            status = GROW_JOBS
            break
        idle = M[0]
        busy = k - idle
        R = lam + mu * busy
        dt = gen.standard_exponential() / R
        if measuring:
            acc[ACC_T] += dt
            acc[ACC_N] += N * dt
            acc[ACC_I] += idle * dt
            tN[N] += dt
            tI[N] += idle * dt
            if maxlev - minlev > 2:
                acc[ACC_SPREAD] += dt
        t += dt
        u = gen.random() * R
        if u < lam:
            arrivals += 1
            N += 1
            lev = choose_level(code, param, M, k, minlev, maxlev, gen, scratch)
            if lev < 0:
                if idle > 0:
                    lev = 0
                else:
                    buf += 1
            if lev >= 0:
                if measuring:
                    occ[lev] += M[lev] * (t - last[lev])
                    occ[lev + 1] += M[lev + 1] * (t - last[lev + 1])
                last[lev] = t
                last[lev + 1] = t
                M[lev] -= 1
                M[lev + 1] += 1
                if lev + 1 > maxlev:
                    maxlev = lev + 1
                if lev == minlev and M[lev] == 0:
                    minlev = lev + 1
        else:
            N -= 1
            if is_cq and buf > 0:
                # the freed server pulls the head of the central queue
                buf -= 1
            else:
                j = int((u - lam) / mu)
                if j >= busy:
                    j = busy - 1
                lev = minlev if minlev > 1 else 1
                cnt = 0
                while lev < maxlev:
                    cnt += M[lev]
                    if j < cnt:
                        break
                    lev += 1
                if measuring:
                    occ[lev] += M[lev] * (t - last[lev])
                    occ[lev - 1] += M[lev - 1] * (t - last[lev - 1])
                last[lev] = t
                last[lev - 1] = t
                M[lev] -= 1
                M[lev - 1] += 1
                if lev - 1 < minlev:
                    minlev = lev - 1
                if lev == maxlev and M[lev] == 0:
                    maxlev = lev - 1
        events += 1

        if measuring:
            excess = 2.0 - N / k
            if excess < 0.0:
                excess = 0.0
            dev = abs(excess - M[1] / k)
            if dev > acc[ACC_SSC]:
                acc[ACC_SSC] = dev
            if rec_every > 0 and events % rec_every == 0:
                nrec = record(rec_t, rec_n, rec_i, rec_m1, rec_m3, nrec, t, N, M, k)
        elif arrivals >= n_warm:
            measuring = True
            for lev in range(L):
                last[lev] = t
            observe_ssc(acc, N, M[1], k)
        if check_every > 0 and events % check_every == 0:
            check_levels(M, k, N, buf, is_cq)

    st[S_N] = N
    st[S_BUF] = buf
    st[S_MIN] = minlev
    st[S_MAX] = maxlev
    st[S_ARR] = arrivals
    st[S_EV] = events
    st[S_MEAS] = 1 if measuring else 0
    st[S_REC] = nrec
    clock[0] = t
    return status


def _rec_capacity(cfg: SimConfig) -> int:
    if cfg.record_every <= 0:
        return 0
    events = 2 * cfg.horizon_arrivals + cfg.start_jobs
    return events // cfg.record_every + 2


def package_metrics(cfg: SimConfig, out, per_server=None) -> TraceMetrics:
    (acc, occ, tN, tI, M, buf, N, events, arrivals, _t,
     rec_t, rec_n, rec_i, rec_m1, rec_m3) = out
    T = acc[c.ACC_T]
    if T <= 0:
        raise EmptyHorizonError("no post-warmup time was simulated")
    top_n = int(np.flatnonzero(tN)[-1]) + 1 if np.any(tN) else 1
    top_lev = int(np.flatnonzero(occ)[-1]) + 1 if np.any(occ) else 1
    trace = None
    if cfg.record_every > 0:
        trace = Trace(cfg.k, rec_t.copy(), rec_n.copy(), rec_i.copy(), rec_m1.copy(), rec_m3.copy())
    top_m = int(np.flatnonzero(M)[-1]) + 1
    state = SystemState(M[:top_m].copy(), int(N), int(buf), per_server)
    return TraceMetrics(
        k=cfg.k,
        time_avg_N=acc[c.ACC_N] / T,
        time_avg_I=acc[c.ACC_I] / T,
        occupancy_histogram=occ[:top_lev] / (cfg.k * T),
        n_time=tN[:top_n] / T,
        idle_by_n=tI[:top_n] / T,
        ssc_sup=float(acc[c.ACC_SSC]),
        spread_gt2_fraction=acc[c.ACC_SPREAD] / T,
        event_count=int(events),
        arrivals=int(arrivals),
        measured_time=float(T),
        transient=not cfg.stable,
        warmup_fraction=cfg.warmup_fraction,
        final_state=state,
        trace=trace,
        meta={
            "policy": str(cfg.policy),
            "lam": cfg.lam,
            "seed": cfg.seed,
            "stream_id": cfg.stream_id,
            "warmup_fraction": cfg.warmup_fraction,
            "initial_jobs": cfg.start_jobs,
        },
    )


def run_ctmc(cfg: SimConfig, stream: RandomStream | None = None) -> TraceMetrics:
    """Simulate the level-count Markov chain for exponential jobs.

    Parameters
    ----------
    cfg
        Run configuration.  ``service_dist`` must be exponential; the
        discipline is irrelevant for exponential jobs under these policies.
    stream
        Random stream; defaults to ``RandomStream(cfg.seed, cfg.stream_id)``.
    """
    if not isinstance(cfg.service_dist, Exponential):
        raise EngineMismatchError("the CTMC engine needs exponential job sizes; use run_event_driven")
    if cfg.policy.needs_work:
        raise EngineMismatchError("lwl needs residual work; use run_event_driven")
    if cfg.policy.name == "pod" and cfg.policy.param > cfg.k:
        from ..distributions import ParameterError

        raise ParameterError(f"pod:{cfg.policy.param} needs at least that many servers")
    if cfg.horizon_arrivals <= 0:
        raise EmptyHorizonError("horizon_arrivals must be positive")
    stream = stream or RandomStream(cfg.seed, cfg.stream_id)
    M0, buf0 = balanced_levels(cfg.k, cfg.start_jobs, central=cfg.policy.uses_central_buffer)
    ws = Workspace(cfg.k, M0, int(buf0), cfg.warmup_arrivals, _rec_capacity(cfg))
    kind, rate = cfg.policy.code, float(cfg.service_dist.rate)
    while True:
        status = _ctmc_kernel(
            cfg.k, float(cfg.lam), rate, kind, cfg.policy.int_param,
            int(cfg.horizon_arrivals), int(cfg.warmup_arrivals), stream.generator,
            int(cfg.record_every), int(cfg.check_every),
            ws.st, ws.clock, ws.acc, *ws.level_arrays, ws.tN, ws.tI, *ws.rec_arrays,
        )
        if status == DONE:
            break
        ws.grow(status)
    out = ws.finish()
    metrics = package_metrics(cfg, out)
    metrics.meta["engine"] = "ctmc"
    metrics.warn_if_transient()
    return metrics
