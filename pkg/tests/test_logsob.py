import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppt.config import Configuration
from ppt.logsob import (EntropySpec, ent_exp, inf_conv_Rc, lemma_Rc_bound, poisson_mass_series, verify_logsob_Rc,
                        verify_logsob_monotone)
from ppt.processes import ConfigurationSpaceIndex, poisson_law

LAW = poisson_law([0.5, 0.5], ConfigurationSpaceIndex(2, 3))


def _two_point():
    idx = ConfigurationSpaceIndex(1, 1)
    return poisson_law([1.0], idx).with_probs(np.array([0.5, 0.5]))


def test_entropy_two_point_frozen():
    law = _two_point()
    assert ent_exp(np.array([0.0, math.log(2)]), law) == pytest.approx(math.log(2) - 1.5 * math.log(1.5), abs=1e-12)


def test_entropy_variants():
    law = _two_point()
    f = np.array([0.0, math.log(2)])
    # E[F e^F] = log 2, E[F] = log 2 / 2, E[e^F] = 3/2
    assert ent_exp(f, law, EntropySpec("mean_product")) == pytest.approx(math.log(2) - 0.75 * math.log(2))
    assert ent_exp(f, law, EntropySpec("mean_log")) == pytest.approx(math.log(2) * (1 - 0.5 * math.log(1.5)))
    with pytest.raises(ValueError):
        EntropySpec("other")


@given(st.lists(st.floats(-3, 3), min_size=len(LAW.index), max_size=len(LAW.index)), st.floats(-5, 5))
def test_entropy_nonnegative_and_shift_covariant(vals, c):
    f = np.array(vals)
    e = ent_exp(f, LAW)
    assert e >= -1e-12
    assert ent_exp(f + c, LAW) == pytest.approx(math.exp(c) * e, rel=1e-9, abs=1e-9)


def test_entropy_of_constant_is_zero():
    assert ent_exp(np.full(len(LAW.index), 3.0), LAW) == pytest.approx(0.0, abs=1e-12)


def test_entropy_monte_carlo_interval(rng):
    f = rng.poisson(1.0, 20000).astype(float)
    est, (lo, hi) = ent_exp(None, samples=f)
    assert lo <= est <= hi
    assert lo <= math.exp(math.e - 1) <= hi


def test_Rc_constant_and_upper_bound(rng):
    idx = LAW.index
    xi = Configuration((1, 1))
    v, Pi, _ = inf_conv_Rc(np.full(len(idx), 2.5), xi, idx, 0.5)
    assert v == pytest.approx(2.5, abs=1e-9)
    f = rng.uniform(-1, 1, len(idx))
    for i, c in enumerate(idx.configs):
        assert inf_conv_Rc(f, c, idx, 0.5)[0] <= f[i] + 1e-9


def test_Rc_is_monotone_in_lambda(rng):
    idx = LAW.index
    f = rng.uniform(-1, 1, len(idx))
    xi = Configuration((2, 1))
    vals = [inf_conv_Rc(f, xi, idx, lam)[0] for lam in (0.0, 0.25, 0.5, 1.0)]
    assert all(a <= b + 1e-8 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(f.min())


def test_logsob_Rc_mass_functional():
    rep = verify_logsob_Rc(LAW, lambda c: c.mass, 0.5)
    assert rep.margin >= 0 and rep.diagnostics["min_F_minus_R"] >= -1e-9


def test_logsob_Rc_constant():
    rep = verify_logsob_Rc(LAW, np.zeros(len(LAW.index)), 0.25)
    assert rep.lhs == pytest.approx(0.0, abs=1e-12) and not rep.violated


def test_lemma_bound_on_single_point_is_tight():
    # for xi = delta_x and F = s * mass the bound is attained
    idx = ConfigurationSpaceIndex(2, 2)
    lhs, rhs, gap = lemma_Rc_bound(lambda c: 1.5 * c.mass, Configuration((1, 0)), idx)
    assert lhs == pytest.approx(rhs, abs=1e-8)
    assert rhs == pytest.approx(1.5 - math.log(2.5))


def test_poisson_mass_series_closed_form():
    ent, rhs0, wu = poisson_mass_series(1.0, 0.0)
    assert ent == pytest.approx(math.exp(math.e - 1), rel=1e-10)
    assert rhs0 == pytest.approx(math.exp(math.e), rel=1e-10)
    assert wu == pytest.approx(math.exp(-1) * math.exp(math.e), rel=1e-10)
    assert ent <= poisson_mass_series(1.0, 0.5)[1]


def test_logsob_monotone_mass_functional():
    F = lambda X: float(X.shape[0])
    D = lambda X: np.ones(X.shape[0])
    rep = verify_logsob_monotone(1.0, [[0, 1]], F, 0.5, 4000, seed=2, diff=D)
    ent, rhs, wu = poisson_mass_series(1.0, 0.5)
    assert not rep.report.violated
    assert rep.rhs_ci[0] - 0.5 <= rhs <= rep.rhs_ci[1] + 0.5
    assert rep.wu_smaller
