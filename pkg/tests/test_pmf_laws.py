import math

import numpy as np
import pytest
from scipy import stats

from treepark.errors import InvalidArgument
from treepark.laws import (Binary, Deterministic, Explicit, ModelSpec, Poisson, TwoPoint,
                           arrival_family, parse_law)
from treepark.pmf import Pmf


def test_pmf_rejects_bad_mass():
    with pytest.raises(InvalidArgument):
        Pmf([0.5, 0.4])
    with pytest.raises(InvalidArgument):
        Pmf([1.2, -0.2])


def test_pmf_moment_brackets():
    p = Pmf([0.5, 0.25], tail_mass=0.25)
    assert p.mean_bounds() == (0.25 + 2 * 0.25, math.inf)
    exact = Pmf([0.5, 0.25, 0.25])
    assert exact.mean_bounds() == (0.75, 0.75)
    assert exact.variance_bounds()[0] == pytest.approx(0.25 + 1.0 - 0.75 ** 2)


def test_pgf_bounds_edges():
    p = Pmf([0.5, 0.25], tail_mass=0.25)
    assert p.pgf_bounds(1.0) == (0.75, 1.0)
    assert p.pgf_bounds(0.0) == (0.5, 0.5)


def test_truncate_moves_mass_to_tail():
    p = Pmf([0.25, 0.25, 0.25, 0.25]).truncate(1)
    assert p.K == 1 and p.tail_mass == pytest.approx(0.5)
    assert Pmf([1.0]).truncate(3).probs.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_tv_distance_counts_tail_atom():
    assert Pmf([1.0]).tv_distance(Pmf([0.5], 0.5)) == pytest.approx(0.5)


def test_csv_roundtrip(tmp_path):
    p = Pmf([0.2, 0.0, 0.8])
    path = tmp_path / "p.csv"
    p.to_csv(path)
    q = Pmf.from_csv(path)
    assert np.array_equal(p.probs, q.probs)
    path.write_text("# comment\nk,prob\n0,0.5\n\n3,0.5\n")
    assert Pmf.from_csv(path).support() == [(0, 0.5), (3, 0.5)]


def test_poisson_table_tail_is_tiny():
    t = Poisson(1.0).table()
    assert t.tail_mass < 1e-16
    assert np.allclose(t.probs, stats.poisson.pmf(np.arange(t.K + 1), 1.0), rtol=0, atol=1e-15)


@pytest.mark.parametrize("law,mean,var", [
    (Poisson(0.3), 0.3, 0.3),
    (Binary(0.1), 1.0, 0.2),
    (TwoPoint(0.3), 0.3, 0.6 - 0.09),
    (Deterministic(2), 2.0, 0.0),
])
def test_moments_match_tables(law, mean, var):
    assert law.mean == pytest.approx(mean)
    assert law.variance == pytest.approx(var)
    lo, _ = law.table().mean_bounds()
    assert lo == pytest.approx(mean, abs=1e-12)
    assert law.table().variance_bounds()[0] == pytest.approx(var, abs=1e-12)


def test_factorial_moment():
    assert Poisson(0.4).factorial_moment2 == pytest.approx(0.16)
    assert TwoPoint(0.4).factorial_moment2 == pytest.approx(0.4)


@pytest.mark.parametrize("bad", [lambda: Binary(0.3), lambda: Binary(0.0), lambda: Poisson(0.0),
                                 lambda: TwoPoint(2.0), lambda: Deterministic(-1),
                                 lambda: Explicit(Pmf([0.5], 0.5))])
def test_parameter_ranges(bad):
    with pytest.raises(InvalidArgument):
        bad()


def test_parse_law(tmp_path):
    assert parse_law("poisson:0.3") == Poisson(0.3)
    assert parse_law("binary:0.25") == Binary(0.25)
    assert parse_law("twopoint:0.3") == TwoPoint(0.3)
    assert parse_law("deterministic:1") == Deterministic(1)
    f = tmp_path / "p.csv"
    f.write_text("0,0.25\n1,0.5\n2,0.25\n")
    assert parse_law(f"file:{f}").mean == pytest.approx(1.0)
    for bad in ("poisson", "poisson:x", "zeta:2", "binary:0.5"):
        with pytest.raises(InvalidArgument):
            parse_law(bad)
    assert str(ModelSpec(Poisson(1.0), Poisson(0.3))) == "poisson:1/poisson:0.3"
    assert arrival_family("twopoint", 0.3) == TwoPoint(0.3)


def test_sampling_matches_law(rng):
    x = TwoPoint(0.3).sample(rng, 100_000)
    assert set(np.unique(x)) <= {0, 2}
    assert abs(np.mean(x == 2) - 0.15) < 3 * math.sqrt(0.15 * 0.85 / 1e5)
