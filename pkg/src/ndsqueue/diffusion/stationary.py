"""Stationary laws of the limiting diffusions.

Closed forms for jsq, cq and iqf, plus :func:`density_from_drift`, which
builds the density ``exp(-V) / Z`` of a one-dimensional diffusion with noise
``sqrt(2 mu) dB`` from its drift alone (``V' = -drift / mu``).  The numeric
route is how the closed forms are cross-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ..distributions import ParameterError
from .drift import DriftSpec, drift

__all__ = [
    "StationaryDensity",
    "DivergentNormalizerError",
    "density_jsq",
    "mean_jsq",
    "normalizer_jsq",
    "cdf_jsq",
    "density_cq",
    "mean_cq",
    "density_iqf",
    "mean_iqf",
    "closed_form",
    "mean_of",
    "density_from_drift",
    "truncation_point",
    "DELTA_FLOOR",
]

DELTA_FLOOR = 1e-9


class DivergentNormalizerError(ArithmeticError):
    """exp(-V) does not decay, so there is no stationary density."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha > 0) or not math.isfinite(alpha):
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return alpha


def truncation_point(alpha: float) -> float:
    """Upper end used for integrals over ``[1, inf)``; the tail beyond is below e^-60."""
    return 1.0 + 60.0 / min(alpha, alpha + 1.0)


@dataclass
class StationaryDensity:
    """A density on ``[1, inf)`` given piecewise up to a constant.

    ``pieces`` holds ``(lo, hi, f)`` with ``f`` the unnormalised density on
    ``[lo, hi]``; the density is ``normalizer * f``.  ``potential`` is the
    numeric ``V`` when the density came from a drift.
    """

    pieces: list
    normalizer: float
    potential: Optional[Callable] = None
    upper: float = math.inf
    support_start: float = 1.0
    name: str = ""
    _cdf: Optional[Callable] = field(default=None, repr=False)
    _mean: Optional[float] = field(default=None, repr=False)

    def pdf(self, n):
        x = np.asarray(n, dtype=float)
        out = np.zeros_like(x)
        for lo, hi, f in self.pieces:
            sel = (x >= lo) & (x <= hi)
            if np.any(sel):
                out[sel] = f(x[sel])
        out = self.normalizer * out
        return float(out) if out.ndim == 0 else out

    __call__ = pdf

    def _quad(self, g, a, b):
        total = 0.0
        for lo, hi, _ in self.pieces:
            lo_, hi_ = max(lo, a), min(hi, b)
            if hi_ > lo_:
                total += integrate.quad(g, lo_, hi_, limit=200, epsabs=1e-14, epsrel=1e-12)[0]
        return total

    def total_mass(self, upper: Optional[float] = None) -> float:
        """Numeric integral of the density (adaptive quadrature)."""
        return self._quad(self.pdf, self.support_start, upper or self.upper)

    def mean(self) -> float:
        if self._mean is not None:
            return self._mean
        return self.numeric_mean()

    def numeric_mean(self, upper: Optional[float] = None) -> float:
        return self._quad(lambda x: x * self.pdf(x), self.support_start, upper or self.upper)

    def cdf(self, n):
        x = np.atleast_1d(np.asarray(n, dtype=float))
        if self._cdf is not None:
            out = self._cdf(x)
        else:
            out = np.array([self._quad(self.pdf, self.support_start, xi) if xi > self.support_start else 0.0 for xi in x])
        out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if np.ndim(n) == 0 else out

    def ccdf(self, n):
        c = self.cdf(n)
        return 1.0 - c


# --- jsq --------------------------------------------------------------------------


def normalizer_jsq(alpha: float) -> float:
    """The constant ``C`` of the jsq density (``1/C`` is its unnormalised mass)."""
    a = _check_alpha(alpha)
    b = a + 1.0
    # unnormalised mass: 1/(a b^2) + e^b / b^2
    return 1.0 / (1.0 / (a * b * b) + math.exp(b) / (b * b))


def density_jsq(n, alpha: float):
    """``C (n-1) e^{-(a+1)(n-2)}`` on [1, 2] and ``C e^{-a(n-2)}`` beyond."""
    a = _check_alpha(alpha)
    C = normalizer_jsq(a)
    x = np.asarray(n, dtype=float)
    out = np.where(
        x >= 2.0,
        C * np.exp(-a * (x - 2.0)),
        C * np.clip(x - 1.0, 0.0, None) * np.exp(-(a + 1.0) * (x - 2.0)),
    )
    out = np.where(x < 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def mean_jsq(alpha: float) -> float:
    a = _check_alpha(alpha)
    b = a + 1.0
    C = normalizer_jsq(a)
    # int_1^2 n (n-1) e^{-b(n-2)} dn with u = n-1:  e^b int_0^1 (u^2 + u) e^{-bu} du
    eb = math.exp(-b)
    m2 = (2.0 - eb * (b * b + 2.0 * b + 2.0)) / b**3
    m1 = (1.0 - eb * (1.0 + b)) / b**2
    lower = math.exp(b) * (m2 + m1)
    upper = 2.0 / a + 1.0 / a**2
    return C * (lower + upper)


def cdf_jsq(n, alpha: float):
    a = _check_alpha(alpha)
    b = a + 1.0
    C = normalizer_jsq(a)
    x = np.asarray(n, dtype=float)
    u = np.clip(x - 1.0, 0.0, 1.0)
    low = C * math.exp(b) * (1.0 - (1.0 + b * u) * np.exp(-b * u)) / b**2
    high = C * (1.0 - np.exp(-a * np.clip(x - 2.0, 0.0, None))) / a
    out = np.where(x <= 2.0, low, low + high)
    out = np.where(x < 1.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


# --- cq and iqf -------------------------------------------------------------------


def density_cq(n, alpha: float):
    a = _check_alpha(alpha)
    x = np.asarray(n, dtype=float)
    out = np.where(x >= 1.0, a * np.exp(-a * (x - 1.0)), 0.0)
    return float(out) if out.ndim == 0 else out


def mean_cq(alpha: float) -> float:
    return 1.0 + 1.0 / _check_alpha(alpha)


def density_iqf(n, alpha: float):
    a = _check_alpha(alpha)
    x = np.asarray(n, dtype=float)
    y = np.clip(x - 1.0, 0.0, None)
    out = np.where(x >= 1.0, a * a * y * np.exp(-a * y), 0.0)
    return float(out) if out.ndim == 0 else out


def mean_iqf(alpha: float) -> float:
    return 1.0 + 2.0 / _check_alpha(alpha)


_MEANS = {"jsq": mean_jsq, "i1f": mean_jsq, "cq": mean_cq, "iqf": mean_iqf}


def mean_of(policy: str, alpha: float) -> float:
    """Stationary mean of the limit diffusion for ``policy``."""
    try:
        return _MEANS[policy.lower()](alpha)
    except KeyError:
        raise ParameterError(f"no closed-form mean for policy {policy!r}") from None


def closed_form(policy: str, alpha: float) -> StationaryDensity:
    """The closed-form stationary density as a :class:`StationaryDensity`."""
    a = _check_alpha(alpha)
    pol = policy.lower()
    if pol in ("jsq", "i1f"):
        C = normalizer_jsq(a)
        pieces = [
            (1.0, 2.0, lambda x: (x - 1.0) * np.exp(-(a + 1.0) * (x - 2.0))),
            (2.0, math.inf, lambda x: np.exp(-a * (x - 2.0))),
        ]
        return StationaryDensity(pieces, C, name="jsq", _cdf=lambda x: cdf_jsq(x, a), _mean=mean_jsq(a))
    if pol == "cq":
        pieces = [(1.0, math.inf, lambda x: np.exp(-a * (x - 1.0)))]
        return StationaryDensity(pieces, a, name="cq",
                                 _cdf=lambda x: np.where(x >= 1, -np.expm1(-a * (x - 1.0)), 0.0),
                                 _mean=mean_cq(a))
    if pol == "iqf":
        def cdf(x):
            y = a * np.clip(x - 1.0, 0.0, None)
            return 1.0 - (1.0 + y) * np.exp(-y)

        pieces = [(1.0, math.inf, lambda x: (x - 1.0) * np.exp(-a * (x - 1.0)))]
        return StationaryDensity(pieces, a * a, name="iqf", _cdf=cdf, _mean=mean_iqf(a))
    raise ParameterError(f"no closed-form density for policy {policy!r}")


# --- numeric density from a drift ------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _segment_integrals(f, nodes):
    # Gauss-Legendre on every [nodes[j], nodes[j+1]] at once
    a, b = nodes[:-1, None], nodes[1:, None]
    half = 0.5 * (b - a)
    x = a + half * (_GL_X[None, :] + 1.0)
    return (half * f(x) * _GL_W[None, :]).sum(axis=1)


def density_from_drift(spec: DriftSpec, delta: float = DELTA_FLOOR, upper: Optional[float] = None,
                       reference: float = 2.0) -> StationaryDensity:
    """Stationary density ``exp(-V)/Z`` with ``V(x) = -int_ref^x drift / mu``.

    The lower end is ``1 + delta`` for drifts that are singular at 1, and the
    support is truncated at ``upper`` (default ``1 + 60/alpha``).  Integrals
    use composite Gauss-Legendre on a grid that is geometric near 1 and
    uniform further out.
    """
    mu = spec.params.mu
    lo = 1.0 + (delta if spec.singular else 0.0)
    hi = upper if upper is not None else truncation_point(spec.params.alpha)
    near = 1.0 + np.geomspace(delta if spec.singular else 1e-9, 1.0, 60)
    nodes = np.unique(np.concatenate([[lo, reference], near, np.linspace(2.0, hi, 800)]))
    nodes = nodes[(nodes >= lo) & (nodes <= hi)]

    g = lambda x: -drift(spec, x) / mu  # V' = -drift / mu
    seg = _segment_integrals(g, nodes)
    V_nodes = np.concatenate([[0.0], np.cumsum(seg)])
    V_nodes -= V_nodes[np.searchsorted(nodes, reference)]

    def V(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        j = np.clip(np.searchsorted(nodes, flat, side="right") - 1, 0, len(nodes) - 2)
        a = nodes[j]
        half = 0.5 * (flat - a)
        pts = a[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
        val = V_nodes[j] + (half[:, None] * g(np.maximum(pts, lo)) * _GL_W[None, :]).sum(axis=1)
        return val.reshape(x.shape) if x.ndim else float(val[0])

    # mass of exp(-V) per segment, evaluated through V at the quadrature points
    a_, b_ = nodes[:-1], nodes[1:]
    half = 0.5 * (b_ - a_)
    pts = a_[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    Vp = V(pts)
    Z = float((half[:, None] * np.exp(-Vp) * _GL_W[None, :]).sum())
    tail = math.exp(-V_nodes[-1]) if V_nodes[-1] < 700 else 0.0
    peak = float(np.exp(-V_nodes.min()))
    if not math.isfinite(Z) or Z <= 0 or tail > 1e-12 * peak:
        raise DivergentNormalizerError(f"exp(-V) does not decay by n={hi:g} for {spec.policy} drift")

    def f(x):
        return np.exp(-V(np.clip(x, lo, hi)))

    return StationaryDensity([(lo, hi, f)], 1.0 / Z, potential=V, upper=hi, support_start=lo,
                             name=f"{spec.policy} (numeric)")
