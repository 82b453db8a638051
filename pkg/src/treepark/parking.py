"""The parking process on a fixed rooted tree.

Each vertex holds one car.  A car drives toward the root and stops at the first
empty vertex, leaving the tree if there is none.  ``park_recursive`` uses the
bottom-up identity ``X(v) = pi(v) + sum over children c of (X(c) - 1)^+``;
``park_sequential`` moves the cars one at a time and serves as its oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels
from .errors import InvalidArgument
from .laws import Law
from .trees import RootedTree

MAX_PATH_N = 8


@dataclass(frozen=True)
class IidLaw:
    law: Law


@dataclass(frozen=True)
class Multinomial:
    m: int


ArrivalMode = Union[IidLaw, Multinomial, None]


@dataclass(frozen=True, eq=False)
class ArrivalConfig:
    counts: np.ndarray
    mode: ArrivalMode = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1:
            raise InvalidArgument("counts must be one-dimensional")
        if np.any(counts < 0):
            raise InvalidArgument("car counts must be non-negative")
        if isinstance(self.mode, Multinomial) and counts.sum() != self.mode.m:
            raise InvalidArgument("multinomial counts must add up to m")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def car_starts(self) -> np.ndarray:
        """One entry per car: the vertex it initially chooses."""
        return np.repeat(np.arange(self.counts.size), self.counts)


@dataclass(frozen=True, eq=False)
class ParkingOutcome:
    visits: np.ndarray
    occupied: np.ndarray
    root_visits: int

    @property
    def departed(self) -> int:
        return max(self.root_visits - 1, 0)

    @property
    def all_parked(self) -> bool:
        return self.root_visits <= 1

    def same_as(self, other: ParkingOutcome) -> bool:
        return (self.root_visits == other.root_visits
                and np.array_equal(self.visits, other.visits)
                and np.array_equal(self.occupied, other.occupied))


def _check_sizes(tree: RootedTree, arrivals: ArrivalConfig):
    if arrivals.counts.size != tree.n_vertices:
        raise InvalidArgument(
            f"arrivals cover {arrivals.counts.size} vertices but the tree has {tree.n_vertices}")


def assign_arrivals_iid(tree: RootedTree, law: Law, rng: np.random.Generator) -> ArrivalConfig:
    return ArrivalConfig(law.sample(rng, tree.n_vertices), IidLaw(law))


def assign_arrivals_multinomial(tree: RootedTree, m: int, rng: np.random.Generator) -> ArrivalConfig:
    if int(m) != m or m < 0:
        raise InvalidArgument("m must be a non-negative integer")
    n = tree.n_vertices
    counts = rng.multinomial(int(m), np.full(n, 1.0 / n))
    return ArrivalConfig(counts, Multinomial(int(m)))


def park_sequential(tree: RootedTree, arrivals: ArrivalConfig, order=None,
                    rng: np.random.Generator | None = None) -> ParkingOutcome:
    """Car-by-car simulation.

    ``order`` lists the starting vertex of each car in driving order and must be
    a rearrangement of the cars in ``arrivals``; when omitted the cars drive in
    a uniformly random order drawn from ``rng``.
    """
    _check_sizes(tree, arrivals)
    starts = arrivals.car_starts()
    if order is None:
        rng = np.random.default_rng() if rng is None else rng
        order = rng.permutation(starts)
    else:
        order = np.asarray(order, dtype=np.int64)
        if not np.array_equal(np.sort(order), starts):
            raise InvalidArgument("order is not a rearrangement of the arriving cars")
    occupied = np.zeros(tree.n_vertices, np.bool_)
    visits = np.zeros(tree.n_vertices, np.int64)
    _kernels.drive_cars(tree.parent, tree.root, order, occupied, visits)
    return ParkingOutcome(visits, occupied, int(visits[tree.root]))


def park_recursive(tree: RootedTree, arrivals: ArrivalConfig) -> ParkingOutcome:
    """Bottom-up evaluation of the visit counts, O(n)."""
    _check_sizes(tree, arrivals)
    visits = np.empty(tree.n_vertices, np.int64)
    chi = _kernels.park_in_order(tree.parent, tree.order, arrivals.counts, visits)
    return ParkingOutcome(visits, visits >= 1, int(chi))


def parking_event(outcome: ParkingOutcome) -> bool:
    """True when every car parks, i.e. at most one car reaches the root."""
    return outcome.root_visits <= 1


def outcome_violations(tree: RootedTree, arrivals: ArrivalConfig, outcome: ParkingOutcome) -> list[str]:
    problems = []
    if not np.array_equal(outcome.occupied, outcome.visits >= 1):
        problems.append("occupied flags disagree with visit counts")
    if arrivals.total != int(outcome.occupied.sum()) + outcome.departed:
        problems.append("cars are not conserved")
    expected = arrivals.counts.copy()
    child = np.flatnonzero(tree.parent >= 0)
    np.add.at(expected, tree.parent[child], np.maximum(outcome.visits[child] - 1, 0))
    if not np.array_equal(expected, outcome.visits):
        problems.append("visit counts do not satisfy the overflow recursion")
    if outcome.root_visits != outcome.visits[tree.root]:
        problems.append("root_visits is not the visit count of the root")
    return problems


def count_path_parking_functions(n: int, m: int) -> tuple[int, int]:
    """Exhaustive count of parking functions for m cars on the n-vertex path.

    Returns (parking functions, n^m).
    """
    if int(n) != n or int(m) != m or not 1 <= m <= n <= MAX_PATH_N:
        raise InvalidArgument(f"need 1 <= m <= n <= {MAX_PATH_N}, got n={n!r}, m={m!r}")
    good, total = _kernels.count_path_parking_functions(int(n), int(m))
    return int(good), int(total)


def konheim_weiss(n: int, m: int) -> int:
    """Closed-form number of parking functions, (n + 1 - m)(n + 1)^(m - 1)."""
    return (n + 1 - m) * (n + 1) ** (m - 1)
