import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppt.config import (Configuration, Functional, PointConfiguration, check_monotone_convex, diff_minus, diff_plus,
                        pair_u_statistic, setminus, u_statistic)
from ppt.processes import ConfigurationSpaceIndex

counts = st.lists(st.integers(0, 3), min_size=3, max_size=3).map(tuple)


def test_configuration_basics():
    xi = Configuration.from_points([0, 2, 2], 3)
    assert xi.counts == (1, 0, 2) and xi.mass == 3
    assert xi.expand() == [0, 2, 2] and not xi.is_simple()
    assert xi.remove_point(2).counts == (1, 0, 1)
    assert Configuration.from_json(xi.to_json()) == xi
    with pytest.raises(ValueError):
        Configuration((1, -1))
    with pytest.raises(ValueError):
        Configuration((0, 1)).remove_point(0)


@given(counts, counts)
def test_setminus_and_order(a, b):
    xi, chi = Configuration(a), Configuration(b)
    d = setminus(xi, chi)
    assert d <= xi
    assert (d + chi).counts == tuple(max(x, y) for x, y in zip(a, b))
    assert xi <= xi + chi


def test_point_configuration_merges_duplicates():
    pc = PointConfiguration.from_array(np.array([[0.5, 0.5], [0.1, 0.2], [0.5, 0.5]]))
    assert pc.mass == 3 and len(pc.points) == 2 and not pc.is_simple()
    assert pc[(0.5, 0.5)] == 2
    assert PointConfiguration.from_json(pc.to_json()) == pc
    assert pc.remove_point((0.5, 0.5)).mass == 2


@given(st.integers(0, 7))
def test_u_statistic_counts_ordered_pairs(n):
    xi = Configuration((n, 0))
    assert u_statistic(lambda x, y: 1.0, 2, xi) == n * (n - 1)
    assert u_statistic(lambda x: 1.0, 1, xi) == n


def test_pair_u_statistic_matches_enumeration(rng):
    X = rng.uniform(size=(7, 2))
    pc = PointConfiguration.from_array(X)
    h = lambda x, y: float(np.sum((np.array(x) - np.array(y)) ** 2) <= 0.09)
    assert pair_u_statistic(X, lambda sq: (sq <= 0.09).astype(float)) == u_statistic(h, 2, pc)


def test_difference_operators():
    F = Functional.mass()
    xi = Configuration((1, 2))
    assert diff_minus(F, xi, 1) == 1.0 and diff_plus(F, xi, 0) == 1.0
    with pytest.raises(ValueError):
        diff_minus(F, Configuration((0, 1)), 0)


def test_shape_check_detects_violations():
    dom = ConfigurationSpaceIndex(2, 3).configs
    assert check_monotone_convex(lambda c: c.mass ** 2, dom).convex
    rep = check_monotone_convex(lambda c: -c.mass, dom)
    assert not rep.nondecreasing and rep.first_violation is not None
    assert not check_monotone_convex(lambda c: np.sqrt(c.mass), dom).convex


@given(st.lists(st.floats(0, 2), min_size=9, max_size=9))
def test_nonnegative_u_statistic_is_convex_nondecreasing(vals):
    H = np.array(vals).reshape(3, 3)
    H = H + H.T
    F = Functional.u_statistic(lambda x, y: H[x, y], 2)
    rep = check_monotone_convex(F, ConfigurationSpaceIndex(3, 3).configs, tol=1e-9)
    assert rep.nondecreasing and rep.convex


def test_functional_from_table():
    dom = ConfigurationSpaceIndex(1, 2).configs
    F = Functional.from_table(dom, [0.0, 1.0, 3.0])
    assert F(Configuration((2,))) == 3.0
    assert list(F.on(dom)) == [0.0, 1.0, 3.0]
