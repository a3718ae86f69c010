import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppt.ground import (INF, AlphaFamily, CostFunction, GroundSpace, alpha1_conjugate, alpha_t, alpha_t_prime,
                        mul_ext, phi, phi_wu, three_point_convex)

unit = st.floats(0.0, 1.0)
t_open = st.floats(0.01, 0.99)


def test_mul_ext_zero_times_inf():
    assert mul_ext(0.0, INF) == 0.0
    assert mul_ext(2.0, INF) == INF


def test_alpha_t_endpoints():
    assert alpha_t(0.0, 1.0) == pytest.approx(1.0)
    assert alpha_t(1.0, 1.0) == INF
    assert alpha_t(0.5, 0.0) == 0.0


def test_alpha_t_frozen_value():
    # t = 1/2, u = 1/2: (0.5*0.5*log 0.5 - 0.75*log 0.75) / 0.25
    ref = (0.25 * math.log(0.5) - 0.75 * math.log(0.75)) / 0.25
    assert alpha_t(0.5, 0.5) == pytest.approx(ref, abs=1e-14)
    assert ref == pytest.approx(0.1698990, abs=1e-7)


def test_alpha_t_limits_are_continuous():
    u = np.linspace(0, 0.99, 50)
    assert np.allclose(alpha_t(1e-7, u), alpha_t(0.0, u), atol=1e-6)
    assert np.allclose(alpha_t(1 - 1e-7, u), alpha_t(1.0, u), atol=1e-4)


def test_alpha_t_rejects_out_of_range():
    with pytest.raises(ValueError):
        alpha_t(1.5, 0.2)
    with pytest.raises(ValueError):
        alpha_t(0.5, 1.2)


@given(t_open, st.floats(0.0, 0.999))
def test_alpha_t_dominates_half_square(t, u):
    assert alpha_t(t, u) >= 0.5 * u * u - 1e-12


@given(t_open, st.floats(0.01, 0.95))
def test_alpha_t_prime_matches_finite_difference(t, u):
    h = 1e-6
    fd = (alpha_t(t, u + h) - alpha_t(t, u - h)) / (2 * h)
    assert alpha_t_prime(t, u) == pytest.approx(fd, rel=1e-4, abs=1e-6)


def test_alpha1_conjugate_against_grid_sup():
    u = np.linspace(0, 1 - 1e-9, 200001)
    a1 = alpha_t(1.0, u)
    for s in (0.1, 1.0, 3.0):
        assert alpha1_conjugate(s) == pytest.approx(np.max(s * u - a1), abs=1e-6)
    assert alpha1_conjugate(1.0) == pytest.approx(1 - math.log(2), abs=1e-15)


@given(st.floats(0.01, 0.95), st.floats(0.0, 20.0))
def test_phi_is_scaled_conjugate(lam, s):
    ref = lam / (1 - lam) * alpha1_conjugate(s / lam)
    assert phi(lam, s) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_phi_frozen_values():
    assert phi(0.0, 2.5) == 2.5
    assert phi(0.5, 1.0) == pytest.approx(2 - math.log(3), abs=1e-15)
    assert phi_wu(1.0) == pytest.approx(math.exp(-1), abs=1e-15)


def test_three_point_convex():
    x = np.linspace(0, 1, 11)
    assert three_point_convex(x ** 2, x)
    assert not three_point_convex(np.sqrt(x), x)


def test_ground_space_round_trip():
    sp = GroundSpace.finite([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert GroundSpace.from_json(sp.to_json()) == sp
    box = GroundSpace.euclidean([[0, 2], [0, 3]])
    assert box.volume == pytest.approx(6.0)
    assert GroundSpace.from_json(box.to_json()) == box


def test_ground_space_rejects_bad_metric():
    with pytest.raises(ValueError):
        GroundSpace.finite([[0, 1], [2, 0]])


def test_cost_functions_on_space():
    sp = GroundSpace.finite([[0, 2], [2, 0]])
    assert np.array_equal(CostFunction.hamming().on_space(sp), [[0, 1], [1, 0]])
    assert np.array_equal(CostFunction.squared_distance().on_space(sp), [[0, 4], [4, 0]])
    X, Y = np.array([[0.0, 0.0]]), np.array([[3.0, 4.0]])
    assert CostFunction.distance_power(1.0).between(X, Y)[0, 0] == pytest.approx(5.0)


def test_alpha_family_members():
    sq = AlphaFamily.square()
    assert sq(3.0) == 9.0 and AlphaFamily.half_square()(2.0) == 2.0
    d = AlphaFamily.dembo(0.5)
    assert d(1.5) == INF and d.domain_max == 1.0
    assert AlphaFamily.dembo(1.0).blows_up
    assert all(AlphaFamily.dembo(t).check_convex() for t in (0.0, 0.3, 1.0))
    sc = sq.scaled(3.0)
    assert sc(2.0) == 12.0 and sc.derivative(1.0) == 6.0


def test_custom_alpha_is_exact_max_of_pieces():
    a = AlphaFamily.custom([0, 0.5, 1], [0, 0.1, 0.6])
    slopes, icpt = a.affine_pieces()
    u = np.linspace(0, 1, 101)
    assert np.allclose(np.max(np.outer(u, slopes) + icpt, axis=1), a(u))
    assert a(1.2) == INF
    with pytest.raises(ValueError):
        AlphaFamily.custom([0, 0.5, 1], [0, 0.4, 0.5])
