"""Jitted helpers shared by the two engines.

Scalar accumulators live in a float64 array ``acc`` so helpers can update
them in place:

    acc[0]  measured time            acc[1]  integral of N
    acc[2]  integral of I            acc[3]  sup |(2 - N/k)+ - M1/k|
    acc[4]  time with queue spread > 2
"""
import numba
import numpy as np

ACC_T, ACC_N, ACC_I, ACC_SSC, ACC_SPREAD = range(5)
N_ACC = 5


@numba.njit(cache=True)
def hold(acc, tN, tI, N, idle, dt, spread):
    acc[ACC_T] += dt
    acc[ACC_N] += N * dt
    acc[ACC_I] += idle * dt
    tN[N] += dt
    tI[N] += idle * dt
    if spread > 2:
        acc[ACC_SPREAD] += dt


@numba.njit(cache=True)
def observe_ssc(acc, N, M1, k):
    excess = 2.0 - N / k
    if excess < 0.0:
        excess = 0.0
    dev = abs(excess - M1 / k)
    if dev > acc[ACC_SSC]:
        acc[ACC_SSC] = dev


@numba.njit(cache=True)
def touch(M, occ, last, lev, t, measuring):
    # fold the time M[lev] spent at its current value into occ before it changes
    if measuring:
        occ[lev] += M[lev] * (t - last[lev])
    last[lev] = t


@numba.njit(cache=True)
def flush_occupancy(M, occ, last, t, top):
    for lev in range(top + 1):
        occ[lev] += M[lev] * (t - last[lev])
        last[lev] = t


@numba.njit(cache=True)
def check_levels(M, k, N, buf, is_cq):
    total = 0
    jobs = 0
    for lev in range(len(M)):
        if M[lev] < 0:
            raise AssertionError("negative level count")
        total += M[lev]
        jobs += lev * M[lev]
    if total != k:
        raise AssertionError("level counts do not sum to k")
    if jobs + buf != N:
        raise AssertionError("job count mismatch")
    if buf < 0:
        raise AssertionError("negative central buffer")
    if is_cq and buf > 0 and M[0] > 0:
        raise AssertionError("idle server while central buffer is non-empty")


@numba.njit(cache=True)
def record(rec_t, rec_n, rec_i, rec_m1, rec_m3, nrec, t, N, M, k):
    if nrec < len(rec_t):
        rec_t[nrec] = t
        rec_n[nrec] = N
        rec_i[nrec] = M[0]
        rec_m1[nrec] = M[1]
        rec_m3[nrec] = k - M[0] - M[1] - M[2]
        return nrec + 1
    return nrec


# --- resumable kernel state ----------------------------------------------------
#
# Kernels never reallocate: they stop with GROW_LEVELS / GROW_JOBS when an
# array is about to overflow, the Python driver enlarges the workspace and the
# kernel resumes from the integer state ``st`` and the clock.

DONE, GROW_LEVELS, GROW_JOBS, GROW_QUEUE = range(4)
S_N, S_BUF, S_MIN, S_MAX, S_ARR, S_EV, S_MEAS, S_REC = range(8)
N_STATE = 8


def _enlarge(a: np.ndarray, n: int, fill=0) -> np.ndarray:
    out = np.full(n, fill, dtype=a.dtype)
    out[: len(a)] = a
    return out


class Workspace:
    """Arrays shared by the engines' kernels, grown on request."""

    def __init__(self, k: int, M_init: np.ndarray, buf: int, n_warm: int, rec_cap: int):
        L = max(2 * len(M_init), 64)
        self.M = _enlarge(np.asarray(M_init, dtype=np.int64), L)
        self.occ = np.zeros(L)
        self.last = np.zeros(L)
        self.scratch = np.zeros(L, dtype=np.int64)
        N = int(np.dot(np.arange(len(M_init)), M_init)) + int(buf)
        cap = max(4 * N + 4 * k + 64, 1024)
        self.tN = np.zeros(cap)
        self.tI = np.zeros(cap)
        self.acc = np.zeros(N_ACC)
        self.clock = np.zeros(1)
        self.st = np.zeros(N_STATE, dtype=np.int64)
        occupied = np.flatnonzero(M_init)
        self.st[S_N] = N
        self.st[S_BUF] = buf
        self.st[S_MIN] = occupied[0]
        self.st[S_MAX] = occupied[-1]
        self.st[S_MEAS] = 1 if n_warm == 0 else 0
        self.rec_t = np.zeros(rec_cap)
        self.rec_n = np.zeros(rec_cap, dtype=np.int64)
        self.rec_i = np.zeros(rec_cap, dtype=np.int64)
        self.rec_m1 = np.zeros(rec_cap, dtype=np.int64)
        self.rec_m3 = np.zeros(rec_cap, dtype=np.int64)
        if n_warm == 0:
            observe_ssc(self.acc, N, self.M[1], k)

    @property
    def level_arrays(self):
        return self.M, self.occ, self.last, self.scratch

    @property
    def rec_arrays(self):
        return self.rec_t, self.rec_n, self.rec_i, self.rec_m1, self.rec_m3

    def grow(self, status: int) -> None:
        if status == GROW_LEVELS:
            L = 2 * len(self.M)
            self.M = _enlarge(self.M, L)
            self.occ = _enlarge(self.occ, L)
            self.last = _enlarge(self.last, L, fill=self.clock[0])
            self.scratch = _enlarge(self.scratch, L)
        elif status == GROW_JOBS:
            cap = 2 * len(self.tN)
            self.tN = _enlarge(self.tN, cap)
            self.tI = _enlarge(self.tI, cap)

    def finish(self):
        t = self.clock[0]
        flush_occupancy(self.M, self.occ, self.last, t, len(self.M) - 1)
        nrec = int(self.st[S_REC])
        return (self.acc, self.occ, self.tN, self.tI, self.M, int(self.st[S_BUF]), int(self.st[S_N]),
                int(self.st[S_EV]), int(self.st[S_ARR]), t,
                self.rec_t[:nrec], self.rec_n[:nrec], self.rec_i[:nrec], self.rec_m1[:nrec],
                self.rec_m3[:nrec])
