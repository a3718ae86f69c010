import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ppt.ground import INF
from ppt.measures import DiscreteMeasure, relative_entropy, tv_distance

probs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=5).map(lambda w: np.array(w) / np.sum(w))


def test_validation():
    with pytest.raises(ValueError):
        DiscreteMeasure.probability([0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMeasure.finite([1.0, -1.0])
    m = DiscreteMeasure.probability([1.0, 3.0], renormalize=True)
    assert np.allclose(m.weights, [0.25, 0.75]) and m.correction == pytest.approx(3.0)
    assert DiscreteMeasure.from_json(m.to_json()) == m
    assert DiscreteMeasure.finite([1.0, 2.0]).total == 3.0


def test_relative_entropy_frozen():
    assert relative_entropy([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3))
    assert relative_entropy([0.5, 0.5], [1.0, 0.0]) == INF
    assert relative_entropy(DiscreteMeasure.dirac(0, 2), [0.5, 0.5]) == pytest.approx(math.log(2))


@given(probs)
def test_relative_entropy_zero_on_diagonal(p):
    assert relative_entropy(p, p) == pytest.approx(0.0, abs=1e-14)


@given(st.integers(2, 5).flatmap(lambda k: st.tuples(
    st.lists(st.floats(0.01, 1), min_size=k, max_size=k), st.lists(st.floats(0.01, 1), min_size=k, max_size=k))))
def test_pinsker(pair):
    p = np.array(pair[0]) / np.sum(pair[0])
    q = np.array(pair[1]) / np.sum(pair[1])
    h = relative_entropy(p, q)
    assert h >= 0
    assert tv_distance(p, q) <= math.sqrt(h / 2) + 1e-12
