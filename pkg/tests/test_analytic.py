import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treepark import analytic as A
from treepark.errors import DomainError, NumericalFailure, SingularityError

# Reference values from an independent 40-digit evaluation (mpmath lambertw + findroot).
MP_PGF = {(0.5, 0.3): 0.83459661915551459741, (0.1, 0.2): 0.81789826835754037516,
          (0.9, 0.2): 0.97773567758573632803, (0.5, 0.4): 0.76804936420284449276}
MP_SUPER = {  # alpha: (p, s_prime, G(0.2), G(0.7)), each G on the branch its s selects
    0.6: (0.41305456788145142119, 0.75574361338265037478, 0.47939942161204154408, 0.71864196311295749754),
    0.75: (0.31843429191387535866, 0.52572203725753558016, 0.38258824341330829218, 0.63365651012703540414),
    0.9: (0.25104211874476935713, 0.38320043432484248129, 0.31167453906812546194, 0.5664240831548737951),
    0.99: (0.21940822316755999167, 0.32215287027697925048, 0.27764209133375370639, 0.53217677737733793721),
}


def test_g_and_h_examples():
    assert A.g_p(1.0, 0.4, 0.123) == -1.0
    assert A.g_p(0.5, 0.3, 0.7) == pytest.approx(-1.85, abs=1e-15)
    assert A.h_p(1.0, 0.8, 0.3) == pytest.approx(-math.exp(-1), abs=1e-16)
    assert A.h_p(0.5, 0.3, 0.7) == pytest.approx(-2 * math.exp(-1.85), rel=1e-15)
    with pytest.raises(DomainError):
        A.g_p(0.0, 0.3, 0.7)
    with pytest.raises(DomainError):
        A.h_p_prime(-1.0, 0.3, 0.7)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_h_prime_vanishes_at_one(alpha):
    assert abs(A.h_p_prime(1.0, alpha, 1 - alpha)) < 1e-15
    d = 5e-6
    fd = (A.h_p(1 + d, alpha, 1 - alpha) - A.h_p(1 - d, alpha, 1 - alpha)) / (2 * d)
    assert abs(fd) < 1e-7


def test_h_prime_matches_finite_differences():
    rng = np.random.default_rng(5)
    for _ in range(20):
        s, a, p = rng.uniform(0.2, 1.5), rng.uniform(0.05, 1.5), rng.uniform(0.05, 0.9)
        d = 1e-5
        fd = (A.h_p(s + d, a, p) - A.h_p(s - d, a, p)) / (2 * d)
        assert abs(fd - A.h_p_prime(s, a, p)) < 1e-7


def test_h_prime_roots_solve_quadratic():
    a, p = 0.9, 0.2
    for root in np.roots([a, -1.0, p]):
        assert abs(A.h_p_prime(float(root), a, p)) < 1e-13


def test_solve_p_reference_values():
    p, s = A.solve_p(0.9)
    assert abs(p - 0.251042) < 1e-4 and abs(s - 0.3832) < 1e-3


def test_solve_p_near_threshold():
    p, _ = A.solve_p(0.51)
    assert 0.49 < p < 1 / 2.04


def test_solve_p_domain():
    with pytest.raises(DomainError):
        A.solve_p(0.5)


@pytest.mark.parametrize("alpha", sorted(MP_SUPER))
def test_solve_p_against_reference(alpha):
    p, s = A.solve_p(alpha)
    ref_p, ref_s, g02, g07 = MP_SUPER[alpha]
    assert p == pytest.approx(ref_p, abs=1e-13)
    assert s == pytest.approx(ref_s, abs=1e-12)
    assert A.pgf(0.2, alpha) == pytest.approx(g02, abs=1e-12)
    assert A.pgf(0.7, alpha) == pytest.approx(g07, abs=1e-12)


@pytest.mark.parametrize("alpha", np.linspace(0.5 + 1e-3, 0.99, 25).tolist())
def test_supercritical_invariants(alpha):
    p, s = A.solve_p(alpha)
    assert 1 - alpha < p < 1 / (4 * alpha)
    assert s == pytest.approx((1 - math.sqrt(1 - 4 * p * alpha)) / (2 * alpha), rel=1e-12)
    assert abs(A.h_p(s, alpha, p) + math.exp(-1)) <= 1e-10
    g = A.make_pgf(alpha)
    assert abs(g.on_branch(s, -1) - g.on_branch(s, 0)) <= 1e-8
    assert p >= math.exp(-1 - alpha)


@pytest.mark.parametrize("key", sorted(MP_PGF))
def test_pgf_against_reference(key):
    s, a = key
    assert A.pgf(s, a) == pytest.approx(MP_PGF[key], abs=1e-13)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.9])
def test_pgf_normalised(alpha):
    assert A.pgf(1.0, alpha) == 1.0


def test_pgf_small_s_gives_p():
    assert abs(A.pgf(1e-6, 0.3) - 0.7) < 1e-3


def test_pgf_domain():
    for bad in (0.0, 1.1):
        with pytest.raises(DomainError):
            A.pgf(bad, 0.3)
    with pytest.raises(DomainError):
        A.make_pgf(1.0)


def test_pgf_inconsistent_p_fails_loudly():
    bad = A.Pgf(0.3, 0.3, 1.0, A.Regime.SUBCRITICAL)
    with pytest.raises(NumericalFailure):
        bad(0.5)


def test_functional_equation():
    assert A.functional_equation_residual(1.0, 0.7, 0.2, 1.0) == 0.0
    for a in (0.1, 0.3, 0.45, 0.5, 0.6, 0.9):
        g = A.make_pgf(a)
        for s in np.linspace(0.1, 0.9, 9):
            assert abs(A.functional_equation_residual(s, a, g.p, g(s))) <= 1e-10
    g = A.make_pgf(0.9)
    for s in (g.s_prime - 1e-3, g.s_prime + 1e-3):
        assert abs(A.functional_equation_residual(s, 0.9, g.p, g(s))) <= 1e-10


def test_derivative_matches_finite_difference():
    g = A.make_pgf(0.3)
    d = 1e-5
    fd = (g(0.5 + d) - g(0.5 - d)) / (2 * d)
    assert abs(g.derivative(0.5) - fd) < 1e-6


@pytest.mark.parametrize("alpha,limit", [(0.32, 0.4), (0.18, 0.2)])
def test_derivative_near_one_is_mean(alpha, limit):
    g = A.make_pgf(alpha)
    assert abs(g.derivative(1 - 1e-6) - limit) < 1e-3


def test_derivative_singularity():
    with pytest.raises(SingularityError):
        A.pgf_derivative(0.5, 0.3, 0.7, 0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.98))
def test_pgf_monotone_and_convex(alpha):
    g = A.make_pgf(alpha)
    s = np.linspace(0.02, 1.0, 50)
    v = np.array([g(x) for x in s])
    assert np.all(np.diff(v) >= -1e-13)
    assert np.all(np.diff(v, 2) >= -1e-10)
    assert 0 < v.min() and v.max() <= 1.0


def test_pgf_decreasing_in_alpha():
    alphas = np.linspace(0.05, 0.95, 19)
    for s in (0.1, 0.4, 0.7, 0.95):
        v = [A.pgf(s, a) for a in alphas]
        assert np.all(np.diff(v) <= 1e-13)


def test_means_and_limits():
    assert A.mean_X(0.5) == 1.0
    assert A.mean_X(0.32) == pytest.approx(0.4, abs=1e-15)
    assert A.mean_X(0.51) == A.INFINITE == math.inf
    assert A.parking_prob_limit(0.0) == 1.0
    assert A.parking_prob_limit(0.32) == pytest.approx(15 / 17, abs=1e-15)
    assert A.parking_prob_limit(0.5) == 0.0 and A.parking_prob_limit(0.9) == 0.0


def test_skip_free_consistency():
    for a in np.linspace(0.01, 0.49, 25):
        assert A.parking_prob_limit(a) == pytest.approx((1 - A.mean_X(a)) / (1 - a), abs=1e-12)


def test_p_interval_bound():
    for a in np.linspace(0.01, 0.99, 50):
        assert A.make_pgf(a).p >= math.exp(-1 - a)


def test_jones_values():
    assert A.jones_alpha_c(0.25) == 0.5
    assert A.jones_mean_X(0.5, 0.25) == 1.5
    assert A.jones_mean_X(0.3, 0.25) == pytest.approx((0.85 - math.sqrt(0.34)) / 0.5, abs=1e-15)
    assert A.jones_mean_X(0.3, 0.25) == pytest.approx(0.5338096, abs=1e-7)
    assert A.jones_mean_X(0.6, 0.25) == math.inf
    assert abs(A.jones_alpha_c(1e-8) - 1) < 1e-3
    grid = [A.jones_alpha_c(b) for b in np.linspace(0.01, 0.25, 25)]
    assert np.all(np.diff(grid) < 0)
    with pytest.raises(DomainError):
        A.jones_alpha_c(0.3)


def test_conditioned_threshold():
    assert A.conditioned_mean_threshold(0.3, 0.5) == pytest.approx(1.7)
    for a in (0.1, 0.4, 0.8):
        assert A.conditioned_mean_threshold(a, 1.0) == pytest.approx(1.0)
    for a in np.linspace(0.05, 0.5, 10):
        assert A.conditioned_mean_threshold(a, 0.5) >= A.jones_mean_X(a, 0.25)
    with pytest.raises(DomainError):
        A.conditioned_mean_threshold(0.3, 0.0)


def test_conjecture_reductions():
    for a in np.linspace(0.1, 0.5, 9):
        assert abs(A.conjecture_mean_X(a, 1.0, a * a) - A.mean_X(a)) <= 1e-12
    for beta in (0.05, 0.1, 0.25):
        for a in np.linspace(0.02, A.jones_alpha_c(beta), 12):
            assert abs(A.conjecture_mean_X(a, 2 * beta, a) - A.jones_mean_X(a, beta)) <= 1e-12
    assert A.conjecture_mean_X(0.6, 1.0, 0.36) == math.inf


def test_conjecture_alpha_c():
    assert abs(A.conjecture_alpha_c(1.0, lambda a: a * a).alpha_c - 0.5) <= 1e-10
    for beta in (0.01, 0.1, 0.25):
        cp = A.conjecture_alpha_c(2 * beta, lambda a: a)
        assert cp.has_transition and abs(cp.alpha_c - A.jones_alpha_c(beta)) <= 1e-10
    assert A.conjecture_alpha_c(0.5, lambda a: 0.0) == (1.0, False)


def test_supercritical_mean():
    assert A.supercritical_mean(2.0, 0.3, 0.1) == pytest.approx(2 - 0.3 - 0.2)
    assert A.supercritical_mean(2.0, 0.3, 0.0) == pytest.approx(2 - 0.3)
    assert A.supercritical_mean(3.0, 0.0, 1.0) == 0.0
    vals = [A.supercritical_mean(1.5, a, 0.0) for a in np.linspace(0, 1, 11)]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(DomainError):
        A.supercritical_mean(1.0, 0.3, 0.1)


def test_tables():
    rows = A.table_rows([0.3, 0.9])
    assert rows[0]["s_prime"] == 1.0 and rows[1]["mean_X"] == math.inf
    jr = A.jones_table_rows([0.3], 0.25)
    assert jr[0]["alpha_c"] == 0.5
