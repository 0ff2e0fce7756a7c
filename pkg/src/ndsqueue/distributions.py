"""Random streams and job-size distributions.

Every simulator in the package draws from a :class:`RandomStream`, which wraps
a numpy ``Generator`` backed by the counter-based Philox bit generator.  The
Philox key is ``(seed, stream_id)``, so two streams with different ids are
distinct substreams of the same family and a given pair always reproduces the
same sequence.

Job sizes are described by small frozen dataclasses.  Each one encodes itself
as ``(kind, p0, p1, p2)`` so the jitted engines can sample without Python
objects; :func:`_draw` is the single sampling routine used both from Python
and from inside the engines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numba
import numpy as np

__all__ = [
    "ParameterError",
    "RandomStream",
    "Deterministic",
    "Exponential",
    "Bimodal",
    "Weibull",
    "ServiceDistribution",
    "PRESETS",
    "get_distribution",
    "sample",
    "moments",
    "exp_interarrival",
]

KIND_DET = 0
KIND_EXP = 1
KIND_BIM = 2
KIND_WEIB = 3

_MASK64 = (1 << 64) - 1


class ParameterError(ValueError):
    """Raised for invalid model or distribution parameters."""


class RandomStream:
    """A reproducible substream identified by ``(seed, stream_id)``.

    A stream is single-owner: hand it to one simulation at a time.  Use
    :meth:`substream` to derive independent children, e.g. one per
    replication.
    """

    __slots__ = ("seed", "stream_id", "generator")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self.generator = np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "RandomStream":
        # children of (s, i) live at stream ids hashed away from small integers
        child = (self.stream_id * 0x9E3779B97F4A7C15 + int(index) + 1) & _MASK64
        return RandomStream(self.seed, child)

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class Deterministic:
    value: float = 1.0

    def __post_init__(self):
        _positive("value", self.value)

    def moments(self) -> tuple[float, float]:
        return float(self.value), 0.0

    def encode(self) -> tuple[int, float, float, float]:
        return KIND_DET, float(self.value), 0.0, 0.0


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self):
        _positive("rate", self.rate)

    def moments(self) -> tuple[float, float]:
        return 1.0 / self.rate, 1.0 / self.rate**2

    def encode(self) -> tuple[int, float, float, float]:
        return KIND_EXP, float(self.rate), 0.0, 0.0


@dataclass(frozen=True)
class Bimodal:
    """``low_value`` with probability ``p_low``, otherwise ``high_value``."""

    p_low: float
    low_value: float
    high_value: float

    def __post_init__(self):
        if not (0.0 < self.p_low < 1.0):
            raise ParameterError(f"p_low must lie in (0, 1), got {self.p_low!r}")
        _positive("low_value", self.low_value)
        _positive("high_value", self.high_value)

    def moments(self) -> tuple[float, float]:
        p, a, b = self.p_low, self.low_value, self.high_value
        mean = p * a + (1 - p) * b
        # p(1-p)(b-a)^2 avoids cancellation in E[X^2] - E[X]^2
        return mean, p * (1 - p) * (b - a) ** 2

    def encode(self) -> tuple[int, float, float, float]:
        return KIND_BIM, float(self.p_low), float(self.low_value), float(self.high_value)


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    def moments(self) -> tuple[float, float]:
        g1 = math.gamma(1.0 + 1.0 / self.shape)
        g2 = math.gamma(1.0 + 2.0 / self.shape)
        return self.scale * g1, self.scale**2 * (g2 - g1 * g1)

    def encode(self) -> tuple[int, float, float, float]:
        return KIND_WEIB, float(self.shape), float(self.scale), 0.0


ServiceDistribution = Union[Deterministic, Exponential, Bimodal, Weibull]

#: Job-size presets, all with mean one, in increasing order of variance.
PRESETS: dict[str, ServiceDistribution] = {
    "det": Deterministic(1.0),
    "exp": Exponential(1.0),
    "bim1": Bimodal(0.9, 0.5, 5.5),
    "weib1": Weibull(0.5, 0.5),
    "weib2": Weibull(1.0 / 3.0, 1.0 / 6.0),
    "bim2": Bimodal(0.99, 0.5, 50.5),
}


def get_distribution(name: str | ServiceDistribution) -> ServiceDistribution:
    if not isinstance(name, str):
        return name
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ParameterError(
            f"unknown distribution {name!r}; expected one of {sorted(PRESETS)}"
        ) from None


@numba.njit(cache=True)
def _draw(kind, p0, p1, p2, gen):
    if kind == KIND_DET:
        return p0
    if kind == KIND_EXP:
        return gen.standard_exponential() / p0
    if kind == KIND_BIM:
        if gen.random() < p0:
            return p1
        return p2
    # Weibull by inversion; 1 - U lies in (0, 1]
    return p1 * (-math.log(1.0 - gen.random())) ** (1.0 / p0)


@numba.njit(cache=True)
def _draw_many(kind, p0, p1, p2, gen, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = _draw(kind, p0, p1, p2, gen)
    return out


def sample(dist: ServiceDistribution | str, stream: RandomStream, size: int | None = None):
    """Draw one job size (or ``size`` of them) from ``dist``."""
    dist = get_distribution(dist)
    kind, p0, p1, p2 = dist.encode()
    if size is None:
        return float(_draw(kind, p0, p1, p2, stream.generator))
    return _draw_many(kind, p0, p1, p2, stream.generator, int(size))


def moments(dist: ServiceDistribution | str) -> tuple[float, float]:
    """Exact ``(mean, variance)`` of ``dist``."""
    return get_distribution(dist).moments()


def exp_interarrival(rate: float, stream: RandomStream, size: int | None = None):
    """Exponential inter-arrival time(s) with the given rate."""
    if not (rate > 0):
        raise ParameterError(f"arrival rate must be positive, got {rate!r}")
    return stream.generator.standard_exponential(size) / rate
