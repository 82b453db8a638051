"""Named offspring and arrival distributions.

Every family can produce a truncated :class:`~treepark.pmf.Pmf` and a
cumulative table used by the inverse-transform samplers in the simulation
kernels.  Families double as offspring laws (N) and arrival laws (P); the
constructors enforce the parameter ranges the models need.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats

from .errors import InvalidArgument
from .pmf import Pmf

# Poisson tables stop at the first j whose upper tail falls below this.
POISSON_TAIL_EPS = 1e-16
MASS_TOL_EXPLICIT = 1e-12


class Law:
    """Common behaviour; subclasses provide ``table()``, ``mean`` and ``variance``."""

    def table(self) -> Pmf:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    @property
    def factorial_moment2(self) -> float:
        """E[P(P - 1)] = Var + mean^2 - mean."""
        return self.variance + self.mean ** 2 - self.mean

    def pmf(self, K: int | None = None) -> Pmf:
        """Law truncated at ``K`` (mass above K goes to the tail)."""
        base = self.table()
        return base if K is None else base.truncate(K)

    def sampling_cdf(self) -> np.ndarray:
        return _sampling_cdf(self)

    def sample(self, rng: np.random.Generator, size=None):
        return np.searchsorted(self.sampling_cdf(), rng.random(size), side="right")


@lru_cache(maxsize=128)
def _sampling_cdf(law: Law) -> np.ndarray:
    table = law.table().sampling_cdf()
    table.setflags(write=False)
    return table


@lru_cache(maxsize=128)
def _poisson_table(mu: float) -> Pmf:
    j = int(mu)
    while stats.poisson.sf(j, mu) >= POISSON_TAIL_EPS:
        j += 1
    k = np.arange(j + 1)
    return Pmf(stats.poisson.pmf(k, mu), float(stats.poisson.sf(j, mu)))


@dataclass(frozen=True)
class Poisson(Law):
    mu: float

    def __post_init__(self):
        if not self.mu > 0 or not math.isfinite(self.mu):
            raise InvalidArgument(f"Poisson mean must be positive, got {self.mu!r}")

    @property
    def mean(self):
        return float(self.mu)

    @property
    def variance(self):
        return float(self.mu)

    def table(self) -> Pmf:
        return _poisson_table(float(self.mu))

    def pmf(self, K: int | None = None) -> Pmf:
        if K is None:
            return self.table()
        k = np.arange(K + 1)
        probs = stats.poisson.pmf(k, self.mu)
        return Pmf(probs, max(float(stats.poisson.sf(K, self.mu)), 0.0))

    def __str__(self):
        return f"poisson:{self.mu:g}"


@dataclass(frozen=True)
class Binary(Law):
    """Critical offspring on {0, 1, 2} with P(N=0) = P(N=2) = beta."""

    beta: float

    def __post_init__(self):
        if not 0 < self.beta <= 0.25:
            raise InvalidArgument(f"Binary beta must lie in (0, 1/4], got {self.beta!r}")

    @property
    def mean(self):
        return 1.0

    @property
    def variance(self):
        return 2.0 * self.beta

    def table(self) -> Pmf:
        return Pmf(np.array([self.beta, 1.0 - 2.0 * self.beta, self.beta]))

    def __str__(self):
        return f"binary:{self.beta:g}"


@dataclass(frozen=True)
class TwoPoint(Law):
    """Cars arrive in pairs: P(P=2) = alpha/2, else no car."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise InvalidArgument(f"TwoPoint alpha must lie in (0, 2), got {self.alpha!r}")

    @property
    def mean(self):
        return float(self.alpha)

    @property
    def variance(self):
        return 2.0 * self.alpha - self.alpha ** 2

    def table(self) -> Pmf:
        return Pmf(np.array([1.0 - self.alpha / 2, 0.0, self.alpha / 2]))

    def __str__(self):
        return f"twopoint:{self.alpha:g}"


@dataclass(frozen=True)
class Deterministic(Law):
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 0:
            raise InvalidArgument(f"Deterministic value must be a non-negative integer, got {self.d!r}")

    @property
    def mean(self):
        return float(self.d)

    @property
    def variance(self):
        return 0.0

    def table(self) -> Pmf:
        return Pmf.point(int(self.d))

    def __str__(self):
        return f"deterministic:{self.d}"


@dataclass(frozen=True, eq=False)
class Explicit(Law):
    law: Pmf
    name: str = "explicit"

    def __post_init__(self):
        if self.law.tail_mass > MASS_TOL_EXPLICIT:
            raise InvalidArgument("explicit laws must have (numerically) zero tail mass")

    @property
    def mean(self):
        return self.law.mean_bounds()[0]

    @property
    def variance(self):
        return self.law.variance_bounds()[0]

    def table(self) -> Pmf:
        return self.law

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ModelSpec:
    """An (offspring law, arrival law) pair."""

    offspring: Law
    arrival: Law

    def __str__(self):
        return f"{self.offspring}/{self.arrival}"


def parse_law(text: str) -> Law:
    """Parse ``family:param`` strings such as ``poisson:0.3`` or ``file:pmf.csv``."""
    family, sep, param = text.partition(":")
    family = family.strip().lower()
    if not sep:
        raise InvalidArgument(f"law {text!r} must look like family:parameter")
    try:
        if family == "poisson":
            return Poisson(float(param))
        if family == "binary":
            return Binary(float(param))
        if family == "twopoint":
            return TwoPoint(float(param))
        if family == "deterministic":
            return Deterministic(int(param))
    except ValueError as exc:
        if isinstance(exc, InvalidArgument):
            raise
        raise InvalidArgument(f"bad parameter in law {text!r}") from exc
    if family == "file":
        return Explicit(Pmf.from_csv(param), name=f"file:{param}")
    raise InvalidArgument(f"unknown law family {family!r}")


def arrival_family(name: str, alpha: float) -> Law:
    """Arrival law of the named family with mean ``alpha``."""
    name = name.lower()
    if name == "poisson":
        return Poisson(alpha)
    if name == "twopoint":
        return TwoPoint(alpha)
    raise InvalidArgument(f"arrival family must be 'poisson' or 'twopoint', got {name!r}")
