"""Euler-Maruyama paths of the limiting diffusions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ..distributions import ParameterError, RandomStream
from .drift import DomainError, DriftSpec
from .stationary import DELTA_FLOOR

__all__ = ["SdePath", "IntegrationError", "euler_maruyama"]

SUBSTEP = 0.01


class IntegrationError(ArithmeticError):
    def __init__(self, step: int):
        super().__init__(f"path became NaN at step {step}")
        self.step = step


@dataclass
class SdePath:
    """Path values every ``dt * record_every`` time units, starting at time 0.

    ``minimum`` and ``time_average`` are taken over every step, not only the
    recorded ones.
    """

    dt: float
    values: np.ndarray
    record_every: int = 1
    minimum: float = math.nan
    time_average: float = math.nan

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.dt * self.record_every

    def after(self, burn_in: float) -> np.ndarray:
        """Recorded values at times ``>= burn_in``."""
        start = int(math.ceil(burn_in / (self.dt * self.record_every) - 1e-9))
        return self.values[start:]


@numba.njit(cache=True)
def _drift(code, alpha, mu, x):
    if code == 2:
        return -alpha * mu
    if code == 1:
        return mu * (1.0 / (x - 1.0) - alpha)
    e = 2.0 - x
    if e < 0.0:
        e = 0.0
    return mu * (e / (x - 1.0) - alpha)


@numba.njit(cache=True)
def _em_kernel(code, alpha, mu, x0, dt, n_steps, rec_every, burn_steps, noise, floor, gen, out):
    x = x0
    lo = x0
    total = 0.0
    out[0] = x0
    nrec = 1
    singular = code != 2
    for step in range(1, n_steps + 1):
        if not singular:
            x = x - alpha * mu * dt
            if noise:
                x += math.sqrt(2.0 * mu * dt) * gen.standard_normal()
            if x < 1.0:
                x = 1.0
        else:
            # Near 1 the drift is ~ mu/(x-1).  Sub-steps keep the drift move
            # below SUBSTEP * (x - 1) so a step cannot overshoot far past 1
            # or get flung upward by the singularity.
            rem = dt
            while rem > 0.0:
                y = x - 1.0
                h = SUBSTEP * y * y / mu
                if h > rem:
                    h = rem
                x = x + _drift(code, alpha, mu, x) * h
                if noise:
                    x += math.sqrt(2.0 * mu * h) * gen.standard_normal()
                if x <= 1.0:
                    # mirror the overshoot back into (1, inf), then keep a floor
                    x = 2.0 - x
                    if x < floor:
                        x = floor
                rem -= h
        if x != x:
            return -step, lo, total
        if step > burn_steps:
            total += x
            if x < lo:
                lo = x
        if step % rec_every == 0 and nrec < len(out):
            out[nrec] = x
            nrec += 1
    return nrec, lo, total


def euler_maruyama(spec: DriftSpec, n0: float, dt: float, horizon: float,
                   stream: RandomStream | None = None, record_every: int = 1,
                   burn_in: float = 0.0, noise: bool = True) -> SdePath:
    """Integrate the limit diffusion with increments ``drift*dt + sqrt(2 mu dt) Z``.

    The cq path is reflected at 1 by ``x := max(1, x)``.  For jsq and iqf the
    drift is singular at 1; close to 1 a step is split into sub-steps short
    enough that the drift moves the path by at most 1% of its distance to 1,
    and a sub-step that still lands at or below 1 is mirrored back and floored
    at ``1 + 1e-9``.  ``noise=False`` turns off the Brownian part.
    ``minimum`` and ``time_average`` of the returned path skip the first
    ``burn_in`` time units.
    """
    if not (dt > 0) or not (horizon > 0):
        raise ParameterError("dt and horizon must be positive")
    if spec.singular and n0 <= 1.0:
        raise DomainError(f"{spec.policy} paths must start above 1")
    if n0 < 1.0:
        raise DomainError("paths must start at or above 1")
    record_every = max(1, int(record_every))
    n_steps = int(round(horizon / dt))
    burn_steps = int(round(burn_in / dt))
    if burn_steps >= n_steps:
        raise ParameterError("burn_in must be shorter than the horizon")
    stream = stream or RandomStream(0)
    out = np.empty(n_steps // record_every + 1)
    nrec, lo, total = _em_kernel(spec.code, spec.alpha, spec.mu, float(n0), float(dt), n_steps,
                                 record_every, burn_steps, bool(noise), 1.0 + DELTA_FLOOR,
                                 stream.generator, out)
    if nrec < 0:
        raise IntegrationError(-nrec)
    return SdePath(dt, out[:nrec], record_every, float(lo), total / (n_steps - burn_steps))
