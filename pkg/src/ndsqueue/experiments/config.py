"""Experiment grids and their INI-style config files.

A config file has one section per experiment::

    [jsq-sweep]
    k = 16, 64, 256
    alpha = 0.4
    policy = jsq, i1f
    discipline = fifo
    dist = exp
    reps = 10
    arrivals = 1000000
    seed = 1
    out = jsq-sweep.csv

Give either ``alpha`` or ``rho`` (lists allowed).  ``warmup`` (fraction of
arrivals discarded) and ``engine`` (auto, ctmc, event) are optional.
"""
from __future__ import annotations

import configparser
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..distributions import ParameterError, get_distribution
from ..policies import parse_policy

__all__ = ["ExperimentConfig", "GridPoint", "load_config"]


@dataclass(frozen=True)
class GridPoint:
    k: int
    alpha: Optional[float]
    rho: Optional[float]
    policy: str
    discipline: str
    dist: str

    @property
    def lam(self) -> float:
        # mu = 1 throughout: unit-rate servers and mean-one jobs
        if self.alpha is not None:
            return self.k - self.alpha
        return self.rho * self.k

    @property
    def load(self) -> float:
        return self.lam / self.k

    @property
    def spare(self) -> float:
        return self.k - self.lam

    @property
    def stable(self) -> bool:
        return self.lam < self.k


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    ks: Sequence[int]
    policies: Sequence[str]
    alphas: Sequence[float] = ()
    rhos: Sequence[float] = ()
    disciplines: Sequence[str] = ("fifo",)
    dists: Sequence[str] = ("exp",)
    replications: int = 10
    arrivals_per_rep: int = 1_000_000
    seed_base: int = 1
    output: Optional[str] = None
    warmup_fraction: float = 0.2
    engine: str = "auto"
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("ks", "policies", "alphas", "rhos", "disciplines", "dists"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if bool(self.alphas) == bool(self.rhos):
            raise ParameterError("give exactly one of alpha or rho")
        if not self.ks or not self.policies or not self.disciplines or not self.dists:
            raise ParameterError("the parameter grid is empty")
        if self.replications < 1:
            raise ParameterError("replications must be >= 1")
        if self.arrivals_per_rep < 1:
            raise ParameterError("arrivals_per_rep must be >= 1")
        if any(int(k) < 1 for k in self.ks):
            raise ParameterError("k must be >= 1")
        if any(a <= 0 for a in self.alphas) or any(r <= 0 for r in self.rhos):
            raise ParameterError("alpha and rho must be positive")
        for p in self.policies:
            parse_policy(p)
        for d in self.dists:
            get_distribution(d)
        for d in self.disciplines:
            if d not in ("fifo", "ps"):
                raise ParameterError(f"unknown discipline {d!r}")
        if self.engine not in ("auto", "ctmc", "event"):
            raise ParameterError(f"unknown engine {self.engine!r}")

    def grid(self) -> list[GridPoint]:
        loads = [(a, None) for a in self.alphas] or [(None, r) for r in self.rhos]
        out = []
        for k, (a, r), pol, disc, dist in itertools.product(self.ks, loads, self.policies, self.disciplines, self.dists):
            if a is not None and a >= k:
                raise ParameterError(f"alpha={a} needs k > alpha, got k={k}")
            out.append(GridPoint(int(k), a, r, str(parse_policy(pol)), disc, dist))
        return out


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _words(text: str) -> list[str]:
    return [x.strip() for x in text.replace(";", ",").split(",") if x.strip()]


_KNOWN = {"k", "alpha", "rho", "policy", "discipline", "dist", "reps", "arrivals", "seed", "out", "warmup", "engine"}


def load_config(path) -> list[ExperimentConfig]:
    """Parse every section of an INI file into an :class:`ExperimentConfig`."""
    parser = configparser.ConfigParser(interpolation=None)
    with open(path) as fh:
        parser.read_file(fh)
    configs = []
    for name in parser.sections():
        sec = parser[name]
        unknown = set(sec) - _KNOWN
        if unknown:
            raise ParameterError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
        if "k" not in sec or "policy" not in sec:
            raise ParameterError(f"[{name}] needs at least k and policy")
        configs.append(ExperimentConfig(
            experiment_id=name,
            ks=[int(x) for x in _floats(sec["k"])],
            policies=_words(sec["policy"]),
            alphas=_floats(sec.get("alpha", "")),
            rhos=_floats(sec.get("rho", "")),
            disciplines=_words(sec.get("discipline", "fifo")),
            dists=_words(sec.get("dist", "exp")),
            replications=int(sec.get("reps", "10")),
            arrivals_per_rep=int(float(sec.get("arrivals", "1000000"))),
            seed_base=int(sec.get("seed", "1")),
            output=sec.get("out"),
            warmup_fraction=float(sec.get("warmup", "0.2")),
            engine=sec.get("engine", "auto"),
        ))
    if not configs:
        raise ParameterError(f"{path}: no experiment sections")
    return configs
