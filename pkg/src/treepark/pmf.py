"""Truncated probability mass functions on {0, ..., K} with explicit tail mass.

A :class:`Pmf` stores ``probs[k] = P(X = k)`` for ``k <= K`` and the probability
``tail_mass = P(X > K)`` as a separate number.  Nothing is assumed about where
the tail mass sits beyond ``K``, so moments come back as intervals.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Pmf:
    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidArgument("probs must be a non-empty 1-D array")
        if np.any(probs < 0) or self.tail_mass < 0:
            raise InvalidArgument("probabilities must be non-negative")
        total = math.fsum(probs) + self.tail_mass
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidArgument(f"pmf mass is {total!r}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @classmethod
    def point(cls, k: int) -> Pmf:
        probs = np.zeros(k + 1)
        probs[k] = 1.0
        return cls(probs)

    @classmethod
    def from_values(cls, pairs) -> Pmf:
        """Build from ``(value, probability)`` pairs; repeated values add up."""
        pairs = list(pairs)
        if not pairs:
            raise InvalidArgument("empty support")
        top = max(int(v) for v, _ in pairs)
        probs = np.zeros(top + 1)
        for v, p in pairs:
            if int(v) != v or v < 0:
                raise InvalidArgument(f"support value {v!r} is not a non-negative integer")
            probs[int(v)] += p
        return cls(probs)

    @property
    def K(self) -> int:
        return self.probs.size - 1

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        head = ", ".join(f"{p:.4g}" for p in self.probs[:6])
        more = ", ..." if self.probs.size > 6 else ""
        return f"Pmf(K={self.K}, probs=[{head}{more}], tail_mass={self.tail_mass:.3g})"

    def support(self) -> list[tuple[int, float]]:
        return [(int(k), float(p)) for k, p in enumerate(self.probs) if p > 0]

    def padded(self, K: int) -> np.ndarray:
        """In-range probabilities as a length ``K + 1`` array (requires K >= self.K)."""
        if K < self.K:
            raise InvalidArgument("cannot pad to a smaller bound; use truncate()")
        out = np.zeros(K + 1)
        out[: self.probs.size] = self.probs
        return out

    def truncate(self, K: int) -> Pmf:
        """Same law seen through bound ``K``; anything above moves to the tail."""
        if K >= self.K:
            return Pmf(self.padded(K), self.tail_mass)
        spill = math.fsum(self.probs[K + 1:])
        return Pmf(self.probs[: K + 1].copy(), self.tail_mass + spill)

    def mean_bounds(self) -> tuple[float, float]:
        """``[lower, upper]`` for E[X]; the upper end is infinite when tail mass is positive."""
        k = np.arange(self.probs.size)
        lo = math.fsum(k * self.probs) + (self.K + 1) * self.tail_mass
        return lo, (math.inf if self.tail_mass > 0 else lo)

    def variance_bounds(self) -> tuple[float, float]:
        # Placing all tail mass at K + 1 minimizes the variance over admissible tails.
        k = np.arange(self.probs.size, dtype=np.float64)
        m1 = math.fsum(k * self.probs) + (self.K + 1) * self.tail_mass
        m2 = math.fsum(k * k * self.probs) + (self.K + 1) ** 2 * self.tail_mass
        lo = max(m2 - m1 * m1, 0.0)
        return lo, (math.inf if self.tail_mass > 0 else lo)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def pgf_bounds(self, s: float) -> tuple[float, float]:
        if not 0.0 <= s <= 1.0:
            raise InvalidArgument("pgf bracket needs s in [0, 1]")
        lo = math.fsum(self.probs * s ** np.arange(self.probs.size))
        return lo, lo + self.tail_mass * s ** self.K

    def tv_distance(self, other: Pmf) -> float:
        """Total variation distance, treating each tail as one extra atom."""
        K = max(self.K, other.K)
        diff = np.abs(self.padded(K) - other.padded(K))
        return 0.5 * (math.fsum(diff) + abs(self.tail_mass - other.tail_mass))

    def sampling_cdf(self) -> np.ndarray:
        """Cumulative table for inverse-transform sampling.

        Tail mass is mapped onto the value ``K + 1``, a conservative stand-in.
        """
        table = np.cumsum(np.append(self.probs, self.tail_mass))
        table /= table[-1]
        table[-1] = 1.0
        return table

    def sample(self, rng: np.random.Generator, size=None):
        return np.searchsorted(self.sampling_cdf(), rng.random(size), side="right")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for k, p in enumerate(self.probs):
                writer.writerow([k, repr(float(p))])

    @classmethod
    def from_csv(cls, path) -> Pmf:
        """Read ``k,prob`` lines; blank lines and ``#`` comments are skipped."""
        pairs = []
        with open(Path(path)) as fh:
            for line_no, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].strip().startswith("#"):
                    continue
                if row[0].strip() == "k":
                    continue
                try:
                    pairs.append((int(row[0]), float(row[1])))
                except (ValueError, IndexError) as exc:
                    raise InvalidArgument(f"{path}:{line_no}: expected 'k,prob'") from exc
        return cls.from_values(pairs)
