"""Compiled and NumPy kernels must agree bit for bit."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hrpca import _backend, _core_py

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
needs_both = pytest.mark.skipif(
    "cython" not in _backend.available(), reason="compiled extension not built"
)


def _pair():
    return _backend.get("cython"), _core_py


@needs_both
@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 6)), elements=finite),
    st.data(),
)
def test_trimmed_sums_identical(proj, data):
    t = data.draw(st.integers(0, proj.shape[0]))
    c, p = _pair()
    assert np.array_equal(c.trimmed_sums(proj, t), p.trimmed_sums(proj, t))


@needs_both
@pytest.mark.parametrize("n", [511, 512, 513, 3000])
def test_trimmed_sums_identical_large(n, rng):
    proj = rng.standard_normal((n, 3)) * rng.uniform(0.1, 1e3, 3)
    proj[7::7] = proj[: len(proj[7::7])]  # ties
    c, p = _pair()
    for t in (0, 1, n // 3, n - 1, n):
        assert np.array_equal(c.trimmed_sums(proj, t), p.trimmed_sums(proj, t))


@needs_both
@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 6)), elements=finite))
def test_row_sq_norms_identical(proj):
    c, p = _pair()
    assert np.array_equal(c.row_sq_norms(proj), p.row_sq_norms(proj))


@needs_both
@settings(max_examples=300, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 30), elements=st.floats(0, 1e3)),
    st.floats(0, 1, exclude_max=True),
)
def test_sample_index_identical(w, u):
    c, p = _pair()
    assert c.sample_index(w, u) == p.sample_index(w, u)


@needs_both
def test_rank1_downdate_identical(rng):
    c, p = _pair()
    S = rng.standard_normal((7, 7))
    S = S @ S.T
    y = rng.standard_normal(7)
    S1, S2 = S.copy(), S.copy()
    c.rank1_downdate(S1, y)
    p.rank1_downdate(S2, y)
    assert np.array_equal(S1, S2)


def test_trimmed_sums_values(backend):
    proj = np.array([[1.0, 0.0], [-2.0, 3.0], [3.0, -1.0]])
    assert backend.trimmed_sums(proj, 3).tolist() == [14.0, 10.0]
    assert backend.trimmed_sums(proj, 2).tolist() == [5.0, 1.0]
    assert backend.trimmed_sums(proj, 0).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        backend.trimmed_sums(proj, 4)


def test_sample_index_never_picks_zero_weight(backend):
    w = np.array([0.0, 2.0, 0.0, 0.0, 1.0, 0.0])
    picks = {backend.sample_index(w, u) for u in np.linspace(0, 1, 1001, endpoint=False)}
    assert picks == {1, 4}


def test_sample_index_inversion_boundaries(backend):
    w = np.array([3.0, 1.0, 0.0])
    assert backend.sample_index(w, 0.0) == 0
    assert backend.sample_index(w, 0.7499) == 0
    assert backend.sample_index(w, 0.75) == 1
    assert backend.sample_index(w, np.nextafter(1.0, 0.0)) == 1


def test_sample_index_all_zero_is_uniform(backend):
    w = np.zeros(4)
    assert [backend.sample_index(w, u) for u in (0.0, 0.24, 0.25, 0.99)] == [0, 0, 1, 3]


def test_sample_index_empty(backend):
    with pytest.raises(ValueError):
        backend.sample_index(np.zeros(0), 0.5)


def test_rank1_downdate_values(backend):
    S = np.eye(2) * 5.0
    backend.rank1_downdate(S, np.array([1.0, 2.0]))
    assert S.tolist() == [[4.0, -2.0], [-2.0, 1.0]]
