"""Dispatch policies.

Two views of the same decision rules live here:

* :func:`dispatch` works on a per-server snapshot (:class:`StateView`) and is
  the readable reference implementation.
* :func:`choose_level` works on level counts ``M[l]`` (number of servers
  holding ``l`` jobs) and is what the jitted engines call.  It returns the
  queue length of the destination; the engine then picks a server uniformly
  among those at that length, which gives the same distribution over servers
  as :func:`dispatch`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .distributions import ParameterError, RandomStream

__all__ = [
    "Policy",
    "StateView",
    "CapabilityError",
    "CENTRAL_BUFFER",
    "dispatch",
    "parse_policy",
    "choose_level",
]

CENTRAL_BUFFER = -1

RANDOM, JSQ, POD, IQF, I1F, IDF, CQ, LWL = range(8)

_NAMES = {
    RANDOM: "random",
    JSQ: "jsq",
    POD: "pod",
    IQF: "iqf",
    I1F: "i1f",
    IDF: "idf",
    CQ: "cq",
    LWL: "lwl",
}
_CODES = {v: k for k, v in _NAMES.items()}


class CapabilityError(RuntimeError):
    """The state view lacks information the policy needs."""


@dataclass(frozen=True)
class Policy:
    """A dispatch rule.

    ``param`` is ``d`` for power-of-d and the length threshold ``q`` for
    idle-q-first; other rules take no parameter.
    """

    name: str
    param: Optional[int] = None

    def __post_init__(self):
        if self.name not in _CODES:
            raise ParameterError(f"unknown policy {self.name!r}")
        if self.name == "pod":
            if self.param is None or self.param < 2:
                raise ParameterError("pod needs d >= 2")
        elif self.name == "idf":
            if self.param is None or self.param < 0:
                raise ParameterError("idf needs q >= 0")
        elif self.param is not None:
            raise ParameterError(f"policy {self.name!r} takes no parameter")

    @property
    def code(self) -> int:
        return _CODES[self.name]

    @property
    def int_param(self) -> int:
        return -1 if self.param is None else int(self.param)

    @property
    def uses_central_buffer(self) -> bool:
        return self.name == "cq"

    @property
    def needs_work(self) -> bool:
        return self.name == "lwl"

    def __str__(self) -> str:
        return self.name if self.param is None else f"{self.name}:{self.param}"


def parse_policy(text: str | Policy) -> Policy:
    """Parse ``"jsq"``, ``"pod:2"``, ``"idf:1"`` and friends."""
    if isinstance(text, Policy):
        return text
    name, _, arg = text.strip().lower().partition(":")
    if arg:
        try:
            return Policy(name, int(arg))
        except ValueError as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ParameterError(f"bad policy parameter in {text!r}") from None
    return Policy(name)


@dataclass(frozen=True)
class StateView:
    """Read-only snapshot of the servers at an arrival epoch."""

    queue_lengths: np.ndarray
    residual_work: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "queue_lengths", np.asarray(self.queue_lengths, dtype=np.int64))
        if self.residual_work is not None:
            object.__setattr__(self, "residual_work", np.asarray(self.residual_work, dtype=float))

    @property
    def k(self) -> int:
        return len(self.queue_lengths)


def _uniform_among(mask: np.ndarray, gen) -> int:
    idx = np.flatnonzero(mask)
    return int(idx[gen.integers(len(idx))])


def dispatch(policy: Policy | str, view: StateView, stream: RandomStream) -> int:
    """Destination server index for an arriving job, or ``CENTRAL_BUFFER``."""
    policy = parse_policy(policy)
    q = view.queue_lengths
    k = len(q)
    gen = stream.generator
    name = policy.name

    if name == "cq":
        return CENTRAL_BUFFER
    if name == "random":
        return int(gen.integers(k))
    if name == "jsq":
        return _uniform_among(q == q.min(), gen)
    if name == "lwl":
        if view.residual_work is None:
            raise CapabilityError("lwl needs per-server residual work in the view")
        w = view.residual_work
        return _uniform_among(w == w.min(), gen)
    if name == "pod":
        d = policy.param
        if d > k:
            raise ParameterError(f"pod:{d} needs at least {d} servers, got {k}")
        picked = gen.choice(k, size=d, replace=False)
        best = q[picked].min()
        return int(gen.choice(picked[q[picked] == best]))

    threshold = {"iqf": 0, "i1f": 1}.get(name, policy.param)
    shortest = q.min()
    if shortest <= threshold:
        return _uniform_among(q == shortest, gen)
    return int(gen.integers(k))


# --- level-count decision used by the engines ---------------------------------


@numba.njit(cache=True)
def _level_of_rank(M, lo, hi, j):
    # level holding the j-th server (0-based) when servers are ordered by level
    acc = 0
    for lev in range(lo, hi + 1):
        acc += M[lev]
        if j < acc:
            return lev
    return hi


@numba.njit(cache=True)
def choose_level(code, param, M, k, minlev, maxlev, gen, scratch):
    """Queue length of the destination server, or -1 for the central buffer.

    ``M`` holds level counts, ``minlev``/``maxlev`` bracket the occupied
    levels and ``scratch`` is an int64 work array at least ``maxlev + 1``
    long (only power-of-d touches it).
    """
    if code == CQ:
        return -1
    if code == JSQ:
        return minlev
    if code == RANDOM:
        return _level_of_rank(M, minlev, maxlev, int(gen.random() * k))
    if code == POD:
        for lev in range(minlev, maxlev + 1):
            scratch[lev] = M[lev]
        best = maxlev
        for j in range(param):
            r = int(gen.random() * (k - j))
            acc = 0
            lev = minlev
            while lev <= maxlev:
                acc += scratch[lev]
                if r < acc:
                    break
                lev += 1
            scratch[lev] -= 1
            if lev < best:
                best = lev
        return best
    if code == IQF:
        threshold = 0
    elif code == I1F:
        threshold = 1
    else:
        threshold = param
    if minlev <= threshold:
        return minlev
    return _level_of_rank(M, minlev, maxlev, int(gen.random() * k))
