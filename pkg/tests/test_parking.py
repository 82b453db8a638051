import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_small_tree
from treepark.errors import InvalidArgument
from treepark.laws import Deterministic, Poisson, TwoPoint
from treepark.parking import (ArrivalConfig, Multinomial, ParkingOutcome,
                              assign_arrivals_iid, assign_arrivals_multinomial,
                              count_path_parking_functions, konheim_weiss, outcome_violations,
                              park_recursive, park_sequential, parking_event)
from treepark.trees import RootedTree, path_tree, sample_cayley_tree, star_tree


def both(tree, counts, rng):
    arr = ArrivalConfig(counts)
    return park_sequential(tree, arr, rng=rng), park_recursive(tree, arr)


def test_two_path_both_cars_at_leaf(rng):
    for out in both(path_tree(2), [0, 2], rng):
        assert out.root_visits == 1 and out.all_parked and out.departed == 0
        assert out.occupied.tolist() == [True, True]


def test_two_path_both_cars_at_root(rng):
    for out in both(path_tree(2), [2, 0], rng):
        assert out.root_visits == 2 and out.departed == 1 and not out.all_parked


def test_star_one_car_each(rng):
    for out in both(star_tree(3), [1, 1, 1, 1], rng):
        assert out.root_visits == 1 and out.all_parked
        assert out.visits.tolist() == [1, 1, 1, 1]


def test_four_path_all_cars_at_far_end(rng):
    tree = RootedTree([1, 2, 3, -1], 3)  # path 0 -> 1 -> 2 -> 3, root at the end
    seq, rec = both(tree, [4, 0, 0, 0], rng)
    # frozen from hand computation: visits decrease by one per step toward the root
    assert rec.visits.tolist() == [4, 3, 2, 1]
    assert seq.same_as(rec)
    assert rec.root_visits == 1 and rec.departed == 0 and rec.occupied.all()


def test_sequential_needs_matching_order():
    tree, arr = path_tree(2), ArrivalConfig([0, 2])
    assert park_sequential(tree, arr, order=[1, 1]).root_visits == 1
    with pytest.raises(InvalidArgument):
        park_sequential(tree, arr, order=[0, 1])


def test_parking_event():
    def out(chi):
        return ParkingOutcome(np.array([chi]), np.array([chi >= 1]), chi)

    assert parking_event(out(0)) and parking_event(out(1)) and not parking_event(out(2))


def test_iid_zero_law(rng):
    tree = sample_cayley_tree(100, rng)
    assert assign_arrivals_iid(tree, Deterministic(0), rng).total == 0


def test_iid_poisson_mean(rng):
    tree = path_tree(100_000)
    arr = assign_arrivals_iid(tree, Poisson(0.5), rng)
    assert abs(arr.counts.mean() - 0.5) < 3 * math.sqrt(0.5 / 1e5)


def test_iid_twopoint(rng):
    tree = path_tree(100_000)
    c = assign_arrivals_iid(tree, TwoPoint(0.3), rng).counts
    assert set(np.unique(c)) <= {0, 2}
    assert abs(np.mean(c == 2) - 0.15) < 3 * math.sqrt(0.15 * 0.85 / 1e5)


def test_multinomial(rng):
    assert assign_arrivals_multinomial(path_tree(5), 0, rng).total == 0
    assert assign_arrivals_multinomial(path_tree(1), 5, rng).counts.tolist() == [5]
    arr = assign_arrivals_multinomial(path_tree(10), 10_000, rng)
    assert arr.total == 10_000 and arr.mode == Multinomial(10_000)
    sigma = math.sqrt(0.1 * 0.9 / 10_000)
    assert np.all(np.abs(arr.counts / 10_000 - 0.1) < 3.5 * sigma)
    with pytest.raises(InvalidArgument):
        ArrivalConfig([1, 1], Multinomial(3))


@pytest.mark.parametrize("n,m,expected", [(2, 2, (3, 4)), (4, 2, (15, 16)), (5, 1, (5, 5))])
def test_path_counts(n, m, expected):
    assert count_path_parking_functions(n, m) == expected


def test_path_counts_match_closed_form():
    for n in range(1, 8):
        for m in range(1, n + 1):
            assert count_path_parking_functions(n, m)[0] == konheim_weiss(n, m)


@pytest.mark.parametrize("n,m", [(0, 0), (3, 4), (9, 1), (3, 0)])
def test_path_count_range(n, m):
    with pytest.raises(InvalidArgument):
        count_path_parking_functions(n, m)


def _instance(seed):
    rng = np.random.default_rng(seed)
    tree = random_small_tree(rng, 12)
    counts = rng.integers(0, 4, tree.n_vertices)
    return rng, tree, ArrivalConfig(counts)


def check_abelian(seed, orders=50):
    rng, tree, arr = _instance(seed)
    ref = park_recursive(tree, arr)
    assert outcome_violations(tree, arr, ref) == []
    for _ in range(orders):
        out = park_sequential(tree, arr, rng=rng)
        assert out.same_as(ref)
        assert outcome_violations(tree, arr, out) == []


def check_monotone_in_arrivals(seed):
    rng, tree, arr = _instance(seed)
    more = arr.counts + rng.integers(0, 3, tree.n_vertices) * (rng.random(tree.n_vertices) < 0.5)
    assert park_recursive(tree, arr).root_visits <= park_recursive(tree, ArrivalConfig(more)).root_visits


def check_monotone_in_trees(seed):
    rng, tree, arr = _instance(seed)
    keep = np.ones(tree.n_vertices, bool)
    for v in rng.permutation(tree.n_vertices)[: int(rng.integers(0, tree.n_vertices))]:
        if v != tree.root and keep[v]:
            keep[tree.subtree_vertices(v)] = False
    sub, old = tree.induced(np.flatnonzero(keep))
    small = park_recursive(sub, ArrivalConfig(arr.counts[old])).root_visits
    assert small <= park_recursive(tree, arr).root_visits


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 63))
def test_abelian_property(seed):
    check_abelian(seed)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 63))
def test_monotone_in_arrivals(seed):
    check_monotone_in_arrivals(seed)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 63))
def test_monotone_in_trees(seed):
    check_monotone_in_trees(seed)


def test_conservation_on_large_instances(rng):
    for alpha in (0.3, 0.5, 0.9):
        tree = sample_cayley_tree(5000, rng)
        arr = assign_arrivals_iid(tree, Poisson(alpha), rng)
        out = park_recursive(tree, arr)
        assert outcome_violations(tree, arr, out) == []
        assert park_sequential(tree, arr, rng=rng).same_as(out)
