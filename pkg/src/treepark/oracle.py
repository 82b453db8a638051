"""Independent ground truth for the simulators and the closed forms.

* ``rde_step`` / ``rde_fixed_point``: the law of the root-visit count from the
  recursion X = P + sum_{i <= N} (X_i - 1)^+, on truncated pmfs with
  conservative tail bookkeeping.  Starting from a point mass at 0, the k-th
  iterate is exactly the law for the tree cut at depth k.
* ``enumerate_exact``: brute force over every arrival configuration.
* ``walk_simulate`` / ``skip_free_parking_prob``: parking along the spine as a
  random walk C_n = n - sum X_k that never jumps up by more than one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DegenerateInput, InvalidArgument
from .laws import Law, TwoPoint
from .parking import ArrivalConfig, park_recursive
from .pmf import Pmf
from .stats import MeanSummary, mean_interval
from .trees import RootedTree

DEFAULT_K = 512
# Offspring mass below this is folded into the tail instead of convolved.
OFFSPRING_EPS = 1e-16
MAX_ENUMERATION = 10 ** 7
MAX_BINARY_DEPTH = 26
SKIP_FREE_TAIL_TOL = 1e-9


def _as_pmf(law) -> Pmf:
    return law.table() if isinstance(law, Law) else law


class _Trunc(NamedTuple):
    """Probabilities on 0..K plus mass known only to lie beyond K."""

    probs: np.ndarray
    tail: float


def _fit(pmf: Pmf, K: int) -> _Trunc:
    t = pmf.truncate(K)
    return _Trunc(t.probs.copy(), t.tail_mass)


def _conv(a: _Trunc, b: _Trunc, K: int) -> _Trunc:
    # Any outcome touching either tail stays in the tail.
    full = np.convolve(a.probs, b.probs)
    spill = math.fsum(full[K + 1:]) if full.size > K + 1 else 0.0
    tail = a.tail + b.tail - a.tail * b.tail + spill
    return _Trunc(full[:K + 1], tail)


def _overflow(x: _Trunc) -> _Trunc:
    """Law of (X - 1)^+."""
    y = np.empty_like(x.probs)
    y[:-1] = x.probs[1:]
    y[-1] = 0.0
    y[0] += x.probs[0]
    return _Trunc(y, x.tail)


def _compound(y: _Trunc, offspring: Pmf, K: int) -> _Trunc:
    """Law of Y_1 + ... + Y_N with N ~ offspring."""
    nu = offspring.probs
    out = np.zeros(K + 1)
    out_tail = offspring.tail_mass
    power = _Trunc(np.r_[1.0, np.zeros(K)], 0.0)
    remaining = 1.0 - offspring.tail_mass
    for j, w in enumerate(nu):
        if j > 0:
            power = _conv(power, y, K)
        out += w * power.probs
        out_tail += w * power.tail
        remaining -= w
        if j + 1 < nu.size and remaining < OFFSPRING_EPS:
            out_tail += max(math.fsum(nu[j + 1:]), 0.0)
            break
    return _Trunc(out, out_tail)


def _to_pmf(t: _Trunc) -> Pmf:
    probs = np.maximum(t.probs, 0.0)
    total = math.fsum(probs)
    tail = min(max(t.tail, 0.0), 1.0)
    # absorb accumulated rounding so the mass is exactly one
    excess = total + tail - 1.0
    if excess > 0:
        tail = max(tail - excess, 0.0)
    else:
        tail -= excess
    return Pmf(probs, tail)


def rde_step(x_pmf: Pmf, arrival, offspring, K: int = DEFAULT_K) -> Pmf:
    """One application of X -> P + sum_{i <= N} (X_i - 1)^+ truncated at K."""
    if int(K) != K or K < 1:
        raise InvalidArgument(f"K must be a positive integer, got {K!r}")
    arrival, offspring = _as_pmf(arrival), _as_pmf(offspring)
    y = _overflow(_fit(x_pmf, K))
    s = _compound(y, offspring, K)
    return _to_pmf(_conv(s, _fit(arrival, K), K))


class FixedPoint(NamedTuple):
    pmf: Pmf
    iterations: int
    converged: bool


def rde_fixed_point(arrival, offspring, K: int = DEFAULT_K, tol: float = 1e-12,
                    max_iter: int = 100_000) -> FixedPoint:
    """Iterate from a point mass at 0 until successive iterates are within ``tol`` in TV."""
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    x = Pmf.point(0)
    for it in range(1, max_iter + 1):
        nxt = rde_step(x, arrival, offspring, K)
        if nxt.tv_distance(x) <= tol:
            return FixedPoint(nxt, it, True)
        x = nxt
    return FixedPoint(x, max_iter, False)


def rde_iterates(arrival, offspring, K: int = DEFAULT_K, steps: int = 10) -> list[Pmf]:
    """Depth-truncated laws for depths 0..steps (the first is the law of P)."""
    out, x = [], Pmf.point(0)
    for _ in range(steps + 1):
        x = rde_step(x, arrival, offspring, K)
        out.append(x)
    return out


@dataclass(frozen=True)
class DivergenceReport:
    tail_K: float
    tail_2K: float
    iterations: int
    diverges: bool


def divergence_signature(arrival, offspring, K: int = DEFAULT_K, iterations: int = 2000,
                         floor: float = 1e-9) -> DivergenceReport:
    """Compare tail masses at K and 2K after a fixed number of iterations.

    A finite mean forces the tail beyond K to shrink much faster than 1/K, so
    mass that does not at least halve when K doubles is read as E X = inf.
    """
    tails = []
    for bound in (K, 2 * K):
        x = Pmf.point(0)
        for _ in range(iterations):
            x = rde_step(x, arrival, offspring, bound)
        tails.append(x.tail_mass)
    diverges = tails[0] > floor and tails[1] >= 0.5 * tails[0]
    return DivergenceReport(tails[0], tails[1], iterations, diverges)


def pgf_of_pmf(pmf: Pmf, s: float) -> tuple[float, float]:
    """Bracket [lo, hi] for the generating function of a truncated law."""
    return pmf.pgf_bounds(s)


def enumerate_exact(tree: RootedTree, arrival_support) -> Pmf:
    """Exact law of the root-visit count, summing over all arrival configurations.

    ``arrival_support`` lists (value, probability) pairs shared by every vertex.
    """
    support = [(int(v), float(p)) for v, p in arrival_support]
    if not support:
        raise InvalidArgument("arrival support is empty")
    if any(v < 0 or p < 0 for v, p in support):
        raise InvalidArgument("arrival support needs non-negative values and probabilities")
    if abs(math.fsum(p for _, p in support) - 1.0) > 1e-12:
        raise InvalidArgument("arrival probabilities must sum to one")
    if len(support) ** tree.n_vertices > MAX_ENUMERATION:
        raise InvalidArgument(
            f"{len(support)}^{tree.n_vertices} configurations exceed {MAX_ENUMERATION}")
    values = np.array([v for v, _ in support], np.int64)
    probs = np.array([p for _, p in support])
    law = np.zeros(int(values.max()) * tree.n_vertices + 1)
    _kernels.enumerate_root_law(tree.parent, tree.order, values, probs, law)
    return _to_pmf(_Trunc(law, 0.0))


def enumerate_exact_slow(tree: RootedTree, arrival_support) -> Pmf:
    """Reference implementation of ``enumerate_exact`` through ``park_recursive``."""
    import itertools

    support = [(int(v), float(p)) for v, p in arrival_support]
    law = {}
    for combo in itertools.product(support, repeat=tree.n_vertices):
        counts = [v for v, _ in combo]
        w = math.prod(p for _, p in combo)
        chi = park_recursive(tree, ArrivalConfig(counts)).root_visits
        law[chi] = law.get(chi, 0.0) + w
    return Pmf.from_values(law.items())


@dataclass(frozen=True)
class WalkResult:
    failed_within_horizon: bool
    min_C: int
    horizon: int
    first_failure: int | None = None

    @property
    def root_visits_bound(self) -> int:
        return 1 - self.min_C


def _x_table(x) -> np.ndarray:
    if isinstance(x, Law):
        return x.sampling_cdf()
    if isinstance(x, Pmf):
        return x.sampling_cdf()
    table = np.asarray(x, dtype=np.float64)
    if table.ndim != 1 or table[-1] != 1.0:
        raise InvalidArgument("expected a Pmf, a Law or a cumulative table ending in 1")
    return table


def walk_simulate(x_law, horizon: int, rng: np.random.Generator) -> WalkResult:
    """One run of C_n = n - sum_{k <= n} X_k for n = 1..horizon."""
    if int(horizon) != horizon or horizon < 1:
        raise InvalidArgument("horizon must be a positive integer")
    first, cmin = _kernels.walk(rng, _x_table(x_law), int(horizon), False)
    return WalkResult(first >= 0, int(cmin), int(horizon), None if first < 0 else int(first))


def walk_success_count(x_law, horizon: int, trials: int, rng: np.random.Generator) -> int:
    """Number of runs with C_n >= 0 for every n <= horizon."""
    success = np.empty(int(trials), np.bool_)
    _kernels.walk_trials(rng, _x_table(x_law), int(horizon), success)
    return int(success.sum())


def skip_free_parking_prob(x_pmf: Pmf) -> float:
    """P(C_n >= 0 for all n) = (1 - E X) / P(X = 0), or 0 once E X >= 1."""
    if x_pmf.tail_mass > SKIP_FREE_TAIL_TOL:
        raise DegenerateInput(
            f"tail mass {x_pmf.tail_mass:.3g} too large for a reliable mean; refine K")
    mean = x_pmf.mean_bounds()[0]
    if mean >= 1.0:
        return 0.0
    p0 = float(x_pmf.probs[0])
    if p0 == 0.0:
        raise DegenerateInput("P(X = 0) = 0 with E X < 1 is impossible for a valid law")
    return max(0.0, (1.0 - mean) / p0)


def binary_root_visits(depths, alpha: float, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Root visit samples on complete binary trees with paired arrivals.

    Every trial draws one arrival field on the deepest tree and reads off the
    root count for each requested depth, so the columns are monotonically
    coupled.  Returns an array of shape (trials, len(depths)).
    """
    depths = np.atleast_1d(np.asarray(depths, dtype=np.int64))
    if depths.min() < 0 or depths.max() > MAX_BINARY_DEPTH:
        raise InvalidArgument(f"depth must lie in 0..{MAX_BINARY_DEPTH}")
    q = TwoPoint(alpha).alpha / 2.0
    size = 1 << (int(depths.max()) + 1)
    out = np.empty((int(trials), depths.size), np.int64)
    arrivals = np.empty(size, np.int8)
    values = np.empty(size, np.int64)
    _kernels.binary_heap_trials(rng, depths, q, out, arrivals, values)
    return out


def binary_tree_root_visits(depth: int, alpha: float, trials: int,
                            rng: np.random.Generator) -> MeanSummary:
    """Mean root visits on the complete binary tree of the given depth."""
    samples = binary_root_visits([depth], alpha, trials, rng)[:, 0]
    return mean_interval(samples, warn=False)
