"""Drifts of the limiting diffusions for the scaled jobs-per-server process.

All three processes share the noise term ``sqrt(2 mu) dB``; they differ in
the drift on ``(1, inf)``:

    jsq / i1f   mu * ((2 - n)+ / (n - 1) - alpha)
    iqf         mu * (1 / (n - 1) - alpha)
    cq          -alpha * mu, reflected at 1
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..distributions import ParameterError

__all__ = ["NdsParams", "DriftSpec", "DomainError", "drift", "DRIFT_CODES"]

# integer tags used by the jitted integrator
DRIFT_CODES = {"jsq": 0, "i1f": 0, "iqf": 1, "cq": 2}


class DomainError(ValueError):
    """Argument outside the domain of a drift or bound."""


@dataclass(frozen=True)
class NdsParams:
    alpha: float
    mu: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if not (self.mu > 0):
            raise ParameterError(f"mu must be positive, got {self.mu}")


@dataclass(frozen=True)
class DriftSpec:
    policy: str
    params: NdsParams
    reflection_at: Optional[float] = field(default=None)

    def __post_init__(self):
        pol = self.policy.lower()
        if pol not in DRIFT_CODES:
            raise ParameterError(f"no diffusion limit for policy {self.policy!r}")
        object.__setattr__(self, "policy", pol)
        if pol == "cq" and self.reflection_at is None:
            object.__setattr__(self, "reflection_at", 1.0)

    @classmethod
    def of(cls, policy: str, alpha: float, mu: float = 1.0) -> "DriftSpec":
        return cls(policy, NdsParams(alpha, mu))

    @property
    def code(self) -> int:
        return DRIFT_CODES[self.policy]

    @property
    def singular(self) -> bool:
        """True when the drift blows up at n = 1 (the process never reaches it)."""
        return self.policy != "cq"

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def mu(self) -> float:
        return self.params.mu


def drift(spec: DriftSpec, n):
    """Drift at ``n`` (scalar or array)."""
    a, mu = spec.params.alpha, spec.params.mu
    x = np.asarray(n, dtype=float)
    if spec.singular:
        if np.any(x <= 1.0):
            raise DomainError(f"{spec.policy} drift is only defined for n > 1")
    elif np.any(x < 1.0):
        raise DomainError("cq drift is only defined for n >= 1")
    if spec.policy == "cq":
        out = np.full_like(x, -a * mu)
    elif spec.policy == "iqf":
        out = mu * (1.0 / (x - 1.0) - a)
    else:
        out = mu * (np.clip(2.0 - x, 0.0, None) / (x - 1.0) - a)
    return float(out) if out.ndim == 0 else out
