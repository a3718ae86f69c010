import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppt.concentration import (TargetSet, br_bounds, br_experiment, clopper_pearson, convex_distance_cA,
                               convex_distance_dA, convex_distance_dA_direct, edge_kernel, median_ci,
                               pair_statistic, two_set_experiment)
from ppt.config import Configuration, u_statistic, PointConfiguration
from ppt.ground import AlphaFamily
from ppt.processes import ConfigurationSpaceIndex, poisson_law


def test_convex_distance_frozen_example():
    # xi = 2 delta_a, A = {delta_a + delta_b}: one deficit of 1/2 at a
    A = TargetSet((Configuration((1, 1)),))
    c, w = convex_distance_cA(Configuration((2, 0)), A)
    assert c == pytest.approx(0.25, abs=1e-9)
    assert convex_distance_dA(Configuration((2, 0)), A) == pytest.approx(np.sqrt(0.5), abs=1e-6)


def test_members_are_at_distance_zero():
    A = TargetSet.mass_sublevel(ConfigurationSpaceIndex(2, 3), 1)
    assert convex_distance_cA(Configuration((1, 0)), A)[0] == 0.0
    assert convex_distance_dA(Configuration((0, 1)), A) == 0.0
    with pytest.raises(ValueError):
        TargetSet(())


@given(st.integers(0, 10_000))
def test_dA_squared_half_is_cA(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    xi = Configuration(tuple(rng.integers(1, 4, k)))
    A = TargetSet(tuple({Configuration(tuple(rng.integers(0, 3, k))) for _ in range(3)}))
    c, _ = convex_distance_cA(xi, A, AlphaFamily.half_square())
    d = convex_distance_dA_direct(xi, A)
    assert c == pytest.approx(d * d / 2, rel=1e-3, abs=1e-7)


def test_cA_is_monotone_in_t():
    # alpha_t increases with t, so does c_A
    A = TargetSet((Configuration((0, 1)), Configuration((1, 0))))
    xi = Configuration((2, 2))
    vals = [convex_distance_cA(xi, A, AlphaFamily.dembo(t))[0] for t in (0.1, 0.5, 0.9)]
    assert vals[0] <= vals[1] <= vals[2]


def test_two_set_experiment_bounds():
    law = poisson_law([0.5, 0.5], ConfigurationSpaceIndex(2, 4))
    rows, dist = two_set_experiment(law, TargetSet.mass_sublevel(law.index, 1), 0.5, [0.25, 1.0])
    assert not any(r.violated for r in rows)
    assert rows[0].p_A == pytest.approx(2 * np.exp(-1), abs=1e-12)
    assert dist.shape == (len(law.index), 2)


def test_pair_statistic_and_differences(rng):
    X = rng.uniform(size=(8, 2))
    kern = edge_kernel(0.3)
    F, D = pair_statistic(X, kern)
    h = lambda x, y: float(np.sum((np.array(x) - np.array(y)) ** 2) <= 0.09)
    assert F == u_statistic(h, 2, PointConfiguration.from_array(X))
    for i in range(8):
        assert D[i] == pytest.approx(F - pair_statistic(np.delete(X, i, axis=0), kern)[0])


def test_br_bounds_shape():
    up, lo = br_bounds(np.array([0.0, 5.0, 50.0]), 30.0, 16.0, 1.5)
    assert up[0] == 2.0 and np.all(np.diff(up) < 0) and np.all(lo <= 2.0)


def test_clopper_pearson_and_median_ci(rng):
    lo, hi = clopper_pearson(30, 100)
    assert lo < 0.3 < hi
    assert clopper_pearson(0, 50)[0] == 0.0 and clopper_pearson(50, 50)[1] == 1.0
    v = rng.normal(size=2001)
    a, b = median_ci(v)
    assert a <= np.median(v) <= b


def test_br_experiment_small():
    rep = br_experiment(edge_kernel(0.2), 20.0, [[0, 1], [0, 1]], 16.0, 1.5, 500, seed=1)
    assert rep.hypothesis_holds and not rep.violated
    assert rep.median_ci[0] <= rep.median <= rep.median_ci[1]
    with pytest.raises(ValueError):
        br_experiment(edge_kernel(0.2), 20.0, [[0, 1], [0, 1]], 16.0, 2.0, 10, seed=1)
