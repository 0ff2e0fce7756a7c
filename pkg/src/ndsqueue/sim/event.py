"""Event-driven engine for general job sizes, FIFO or processor sharing.

Each server keeps its jobs in a row of a 2-D array:

* FIFO: a ring buffer of job sizes; only the head is in service.
* PS: a binary heap of finish tags in the server's virtual time ``V``, which
  advances at rate ``1/m`` while ``m`` jobs share the server.  The job with
  the smallest tag leaves first, at real time ``t + (tag - V) * m``.

Servers are also filed by queue length (``members[l, :M[l]]``) so the
level-count policy rules from :mod:`ndsqueue.policies` apply unchanged; a
server is then drawn uniformly within the chosen level.  A min segment tree
over per-server departure times finds the next departure in O(log k).
"""
from __future__ import annotations


import numba
import numpy as np

from ..distributions import ParameterError, RandomStream, _draw
from ..policies import CQ, LWL, choose_level
from ._common import (
    ACC_I, ACC_N, ACC_SPREAD, ACC_SSC, ACC_T, DONE, GROW_JOBS, GROW_LEVELS, GROW_QUEUE,
    S_ARR, S_BUF, S_EV, S_MAX, S_MEAS, S_MIN, S_N, S_REC,
    Workspace, _enlarge, check_levels, observe_ssc, record,
)
from .ctmc import _rec_capacity, package_metrics
from .state import EmptyHorizonError, SimConfig, balanced_levels

__all__ = ["run_event_driven"]

FIFO, PS = 0, 1
INF = np.inf
S_CHEAD = 8  # head of the central ring (CQ)


# --- segment tree of departure times -----------------------------------------


@numba.njit(cache=True)
def _tree_update(tree, tidx, dep, K, i):
    tree[K + i] = dep[i]
    node = (K + i) >> 1
    while node >= 1:
        a = tidx[2 * node]
        b = tidx[2 * node + 1]
        if b >= 0 and (a < 0 or dep[b] < dep[a]):
            tidx[node] = b
            tree[node] = dep[b]
        else:
            tidx[node] = a
            tree[node] = dep[a] if a >= 0 else INF
        node >>= 1


@numba.njit(cache=True)
def _tree_build(tree, tidx, dep, K, k):
    for i in range(K):
        tidx[K + i] = i if i < k else -1
        tree[K + i] = dep[i] if i < k else INF
    for node in range(K - 1, 0, -1):
        a = tidx[2 * node]
        b = tidx[2 * node + 1]
        if b >= 0 and (a < 0 or dep[b] < dep[a]):
            tidx[node] = b
        else:
            tidx[node] = a
        tree[node] = dep[tidx[node]] if tidx[node] >= 0 else INF


# --- per-server heaps (PS) -----------------------------------------------------


@numba.njit(cache=True)
def _heap_push(jobs, i, n, val):
    j = n
    jobs[i, j] = val
    while j > 0:
        p = (j - 1) >> 1
        if jobs[i, p] <= jobs[i, j]:
            break
        tmp = jobs[i, p]
        jobs[i, p] = jobs[i, j]
        jobs[i, j] = tmp
        j = p


@numba.njit(cache=True)
def _heap_pop(jobs, i, n):
    # removes the root of a heap with n entries
    last = jobs[i, n - 1]
    n -= 1
    j = 0
    while True:
        c = 2 * j + 1
        if c >= n:
            break
        if c + 1 < n and jobs[i, c + 1] < jobs[i, c]:
            c += 1
        if last <= jobs[i, c]:
            break
        jobs[i, j] = jobs[i, c]
        j = c
    if n > 0:
        jobs[i, j] = last


# --- level buckets -------------------------------------------------------------


@numba.njit(cache=True)
def _move(i, a, b, members, pos, M, occ, last, t, measuring):
    if measuring:
        occ[a] += M[a] * (t - last[a])
        occ[b] += M[b] * (t - last[b])
    last[a] = t
    last[b] = t
    # swap-remove from level a, append to level b
    p = pos[i]
    tail = members[a, M[a] - 1]
    members[a, p] = tail
    pos[tail] = p
    M[a] -= 1
    members[b, M[b]] = i
    pos[i] = M[b]
    M[b] += 1


@numba.njit(cache=True)
def _check_servers(q, members, pos, M, k):
    for i in range(k):
        lev = q[i]
        if members[lev, pos[i]] != i:
            raise AssertionError("server missing from its level bucket")
    total = 0
    for lev in range(len(M)):
        total += M[lev]
    if total != k:
        raise AssertionError("level counts do not sum to k")


@numba.njit(cache=True)
def _event_kernel(k, lam, code, param, disc, kind, p0, p1, p2, n_arr, n_warm, gen, sgen,
                  rec_every, check_every, st, clock, acc, M, occ, last, scratch, tN, tI,
                  rec_t, rec_n, rec_i, rec_m1, rec_m3,
                  members, pos, q, head, jobs, V, tv, dep, empty_at, tree, tidx, cring):
    N = st[S_N]
    buf = st[S_BUF]
    minlev = st[S_MIN]
    maxlev = st[S_MAX]
    arrivals = st[S_ARR]
    events = st[S_EV]
    measuring = st[S_MEAS] == 1
    nrec = st[S_REC]
    chead = st[S_CHEAD]
    t = clock[0]
    next_arr = clock[1]
    is_cq = code == CQ
    L = len(M)
    cap_n = len(tN)
    cap_q = jobs.shape[1]
    cap_c = len(cring)
    K = len(tree) >> 1
    status = DONE

    while arrivals < n_arr:
        if maxlev + 2 >= L:
            status = GROW_LEVELS
            break
        if N + 1 >= cap_n:
            status = GROW_JOBS
            break
        if maxlev + 1 >= cap_q or buf + 1 >= cap_c:
            status = GROW_QUEUE
            break

        t_dep = tree[1]
        t_next = next_arr if next_arr <= t_dep else t_dep
        dt = t_next - t
        if dt < 0.0:
            dt = 0.0
        if measuring:
            idle = M[0]
            acc[ACC_T] += dt
            acc[ACC_N] += N * dt
            acc[ACC_I] += idle * dt
            tN[N] += dt
            tI[N] += idle * dt
            if maxlev - minlev > 2:
                acc[ACC_SPREAD] += dt
        t = t_next

        if next_arr <= t_dep:
            # ---- arrival
            arrivals += 1
            N += 1
            next_arr = t + gen.standard_exponential() / lam
            s = _draw(kind, p0, p1, p2, sgen)
            if code == LWL:
                best = 0
                bw = INF
                ties = 0
                for j in range(k):
                    w = empty_at[j] - t
                    if w < 0.0:
                        w = 0.0
                    if w < bw:
                        bw = w
                        best = j
                        ties = 1
                    elif w == bw:
                        ties += 1
                        if gen.random() * ties < 1.0:
                            best = j
                i = best
            else:
                lev = choose_level(code, param, M, k, minlev, maxlev, gen, scratch)
                if lev < 0:
                    if M[0] > 0:
                        lev = 0
                    else:
                        cring[(chead + buf) % cap_c] = s
                        buf += 1
                        lev = -1
                if lev >= 0:
                    i = members[lev, int(gen.random() * M[lev])]
                else:
                    i = -1
            if i >= 0:
                lev = q[i]
                _move(i, lev, lev + 1, members, pos, M, occ, last, t, measuring)
                if lev + 1 > maxlev:
                    maxlev = lev + 1
                if lev == minlev and M[lev] == 0:
                    minlev = lev + 1
                et = empty_at[i]
                empty_at[i] = (et if et > t else t) + s
                m = lev
                if disc == FIFO:
                    jobs[i, (head[i] + m) % cap_q] = s
                    if m == 0:
                        dep[i] = t + s
                        _tree_update(tree, tidx, dep, K, i)
                else:
                    if m > 0:
                        V[i] += (t - tv[i]) / m
                    else:
                        V[i] = 0.0
                    tv[i] = t
                    _heap_push(jobs, i, m, V[i] + s)
                    d = t + (jobs[i, 0] - V[i]) * (m + 1)
                    dep[i] = d if d > t else t
                    _tree_update(tree, tidx, dep, K, i)
                q[i] = lev + 1
        else:
            # ---- departure
            i = tidx[1]
            N -= 1
            m = q[i]
            if is_cq and buf > 0:
                # the freed server takes the head of the central queue
                s = cring[chead]
                chead = (chead + 1) % cap_c
                buf -= 1
                jobs[i, head[i]] = s
                dep[i] = t + s
                empty_at[i] = t + s
                _tree_update(tree, tidx, dep, K, i)
            else:
                lev = m
                _move(i, lev, lev - 1, members, pos, M, occ, last, t, measuring)
                if lev - 1 < minlev:
                    minlev = lev - 1
                if lev == maxlev and M[lev] == 0:
                    maxlev = lev - 1
                q[i] = m - 1
                if disc == FIFO:
                    head[i] = (head[i] + 1) % cap_q
                    if m > 1:
                        dep[i] = t + jobs[i, head[i]]
                    else:
                        dep[i] = INF
                else:
                    V[i] = jobs[i, 0]
                    tv[i] = t
                    _heap_pop(jobs, i, m)
                    if m > 1:
                        d = t + (jobs[i, 0] - V[i]) * (m - 1)
                        dep[i] = d if d > t else t
                    else:
                        dep[i] = INF
                        V[i] = 0.0
                if m == 1:
                    empty_at[i] = t
                _tree_update(tree, tidx, dep, K, i)
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
            _check_servers(q, members, pos, M, k)

    st[S_N] = N
    st[S_BUF] = buf
    st[S_MIN] = minlev
    st[S_MAX] = maxlev
    st[S_ARR] = arrivals
    st[S_EV] = events
    st[S_MEAS] = 1 if measuring else 0
    st[S_REC] = nrec
    st[S_CHEAD] = chead
    clock[0] = t
    clock[1] = next_arr
    return status


class _EventWorkspace(Workspace):
    def __init__(self, cfg: SimConfig, stream: RandomStream, sizes: RandomStream):
        k = cfg.k
        M0, buf0 = balanced_levels(k, cfg.start_jobs, central=cfg.policy.uses_central_buffer)
        super().__init__(k, M0, int(buf0), cfg.warmup_arrivals, _rec_capacity(cfg))
        self.st = _enlarge(self.st, len(self.st) + 1)
        self.disc = FIFO if cfg.discipline == "fifo" else PS
        self.enc = cfg.service_dist.encode()
        gen = stream.generator
        sgen = sizes.generator

        q = np.repeat(np.arange(len(M0)), M0).astype(np.int64)
        self.q = q
        L = len(self.M)
        self.members = np.zeros((L, k), dtype=np.int64)
        self.pos = np.zeros(k, dtype=np.int64)
        fill = np.zeros(L, dtype=np.int64)
        for i, lev in enumerate(q):
            self.members[lev, fill[lev]] = i
            self.pos[i] = fill[lev]
            fill[lev] += 1

        cap_q = max(16, 2 * int(q.max()) + 4)
        self.jobs = np.zeros((k, cap_q))
        self.head = np.zeros(k, dtype=np.int64)
        self.V = np.zeros(k)
        self.tv = np.zeros(k)
        self.dep = np.full(k, INF)
        self.empty_at = np.zeros(k)
        kind, p0, p1, p2 = self.enc
        for i in range(k):
            m = int(q[i])
            for j in range(m):
                s = _draw(kind, p0, p1, p2, sgen)
                if self.disc == FIFO:
                    self.jobs[i, j] = s
                else:
                    _heap_push(self.jobs, i, j, s)
                self.empty_at[i] += s
            if m:
                self.dep[i] = self.jobs[i, 0] * (m if self.disc == PS else 1)
        self.cring = np.zeros(max(16, 2 * int(buf0) + 4))
        for j in range(int(buf0)):
            self.cring[j] = _draw(kind, p0, p1, p2, sgen)
        K = 2
        while K < k:
            K *= 2
        self.tree = np.full(2 * K, INF)
        self.tidx = np.full(2 * K, -1, dtype=np.int64)
        _tree_build(self.tree, self.tidx, self.dep, K, k)
        self.clock = np.array([0.0, gen.standard_exponential() / cfg.lam])

    def grow(self, status: int) -> None:
        if status == GROW_LEVELS:
            L = len(self.M)
            super().grow(status)
            members = np.zeros((len(self.M), self.members.shape[1]), dtype=np.int64)
            members[:L] = self.members
            self.members = members
        elif status == GROW_QUEUE:
            k, cap = self.jobs.shape
            jobs = np.zeros((k, 2 * cap))
            if self.disc == FIFO:
                # unroll the rings so every head sits at column 0
                for i in range(k):
                    idx = (self.head[i] + np.arange(self.q[i])) % cap
                    jobs[i, : self.q[i]] = self.jobs[i, idx]
                self.head[:] = 0
            else:
                jobs[:, :cap] = self.jobs
            self.jobs = jobs
            cap_c = len(self.cring)
            buf, chead = int(self.st[S_BUF]), int(self.st[S_CHEAD])
            ring = np.zeros(2 * cap_c)
            ring[:buf] = self.cring[(chead + np.arange(buf)) % cap_c]
            self.cring = ring
            self.st[S_CHEAD] = 0
        else:
            super().grow(status)

    def residual_work(self) -> list[np.ndarray]:
        t = self.clock[0]
        out = []
        cap = self.jobs.shape[1]
        for i in range(len(self.q)):
            m = int(self.q[i])
            if m == 0:
                out.append(np.zeros(0))
            elif self.disc == FIFO:
                sizes = self.jobs[i, (self.head[i] + np.arange(m)) % cap].copy()
                sizes[0] = self.dep[i] - t
                out.append(sizes)
            else:
                # remaining work of a PS job is its tag minus the current virtual time
                v = self.V[i] + (t - self.tv[i]) / m
                out.append(np.sort(self.jobs[i, :m]) - v)
        return out


def run_event_driven(cfg: SimConfig, stream: RandomStream | None = None):
    """Simulate per-job residual work under FIFO or processor sharing.

    Works for every policy (including ``lwl``) and any job-size distribution.
    Job sizes come from ``stream.substream(0)`` and arrivals and dispatch
    choices from ``stream`` itself, so runs that differ only in the size
    distribution see the same arrival times.
    The returned metrics carry ``final_state.per_server``, the residual work of
    each job at each server when the run stops.
    """
    if cfg.horizon_arrivals <= 0:
        raise EmptyHorizonError("horizon_arrivals must be positive")
    if cfg.policy.name == "pod" and cfg.policy.param > cfg.k:
        raise ParameterError(f"pod:{cfg.policy.param} needs at least that many servers")
    stream = stream or RandomStream(cfg.seed, cfg.stream_id)
    sizes = stream.substream(0)
    ws = _EventWorkspace(cfg, stream, sizes)
    kind, p0, p1, p2 = ws.enc
    while True:
        status = _event_kernel(
            cfg.k, float(cfg.lam), cfg.policy.code, cfg.policy.int_param, ws.disc,
            kind, p0, p1, p2, int(cfg.horizon_arrivals), int(cfg.warmup_arrivals),
            stream.generator, sizes.generator, int(cfg.record_every), int(cfg.check_every),
            ws.st, ws.clock, ws.acc, *ws.level_arrays, ws.tN, ws.tI, *ws.rec_arrays,
            ws.members, ws.pos, ws.q, ws.head, ws.jobs, ws.V, ws.tv, ws.dep, ws.empty_at,
            ws.tree, ws.tidx, ws.cring,
        )
        if status == DONE:
            break
        ws.grow(status)
    out = ws.finish()
    metrics = package_metrics(cfg, out, per_server=ws.residual_work())
    metrics.meta["engine"] = "event"
    metrics.meta["discipline"] = cfg.discipline
    metrics.meta["dist"] = repr(cfg.service_dist)
    metrics.warn_if_transient()
    return metrics
