import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hrpca.kernel import KernelFn
from hrpca.linalg import fix_signs, gram, orthonormalize, second_moment, top_eigs


class TestSecondMoment:
    def test_three_points(self):
        S = second_moment([[2, 0], [0, 1], [1, 1]], divisor=3)
        assert np.allclose(S, [[5 / 3, 1 / 3], [1 / 3, 2 / 3]], atol=1e-15)

    def test_default_divisor_is_n(self):
        Y = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(second_moment(Y), (Y.T @ Y) / 2)

    def test_empty(self):
        with pytest.raises(ValueError):
            second_moment(np.zeros((0, 3)))

    def test_psd(self, rng):
        S = second_moment(rng.standard_normal((30, 8)))
        w = rng.standard_normal((100, 8))
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        assert np.all(np.einsum("ij,jk,ik->i", w, S, w) >= -1e-12)


class TestTopEigs:
    def test_diagonal(self):
        vals, vecs = top_eigs(np.diag([3.0, 1.0, 2.0]), 2)
        assert np.allclose(vals, [3.0, 2.0])
        assert np.allclose(vecs, [[1, 0], [0, 0], [0, 1]])

    def test_two_by_two(self):
        vals, vecs = top_eigs([[2.0, 1.0], [1.0, 2.0]], 1)
        assert vals[0] == pytest.approx(3.0)
        assert np.allclose(vecs[:, 0], [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_sign_convention(self, rng):
        M = rng.standard_normal((6, 6))
        _, vecs = top_eigs(M + M.T, 6)
        for v in vecs.T:
            assert v[np.argmax(np.abs(v))] > 0

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            top_eigs([[1.0, 2.0], [0.0, 1.0]], 1)

    def test_rejects_bad_d(self):
        with pytest.raises(ValueError):
            top_eigs(np.eye(3), 4)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_full_spectrum_reconstruction_and_trace(self, k, seed):
        r = np.random.default_rng(seed)
        M = r.standard_normal((k, k))
        M = M + M.T
        vals, vecs = top_eigs(M, k)
        R = (vecs * vals) @ vecs.T
        assert np.linalg.norm(R - M) <= 1e-8 * max(np.linalg.norm(M), 1e-300)
        assert abs(vals.sum() - np.trace(M)) <= 1e-9 * max(abs(np.trace(M)), np.abs(vals).sum())
        assert np.all(np.diff(vals) <= 0)


class TestGram:
    def test_linear_orthonormal(self):
        assert np.array_equal(gram([[1, 0], [0, 1]], KernelFn.linear()), np.eye(2))

    def test_constant_kernel(self):
        K = gram(np.arange(6.0).reshape(3, 2), lambda a, b: 2.5)
        assert np.array_equal(K, np.full((3, 3), 2.5))

    def test_rbf(self):
        K = gram([[0.0], [1.0]], KernelFn.rbf(1.0))
        e = np.exp(-1.0)
        assert np.allclose(K, [[1, e], [e, 1]], atol=1e-15)

    def test_linear_matches_inner_products(self, rng):
        Y = rng.standard_normal((15, 4))
        assert np.allclose(gram(Y, KernelFn.linear()), Y @ Y.T, atol=1e-12, rtol=0)

    def test_symmetric_for_callable(self, rng):
        Y = rng.standard_normal((5, 3))
        K = gram(Y, lambda a, b: float(np.exp(-np.sum((a - b) ** 2))))
        assert np.array_equal(K, K.T)


class TestOrthonormalize:
    def test_orthonormal_output(self, rng):
        Q = orthonormalize(rng.standard_normal((7, 3)))
        assert np.allclose(Q.T @ Q, np.eye(3), atol=1e-12)

    def test_dependent_columns(self):
        with pytest.raises(ValueError):
            orthonormalize(np.array([[1.0, 2.0], [1.0, 2.0]]))

    def test_fix_signs(self):
        V = fix_signs(np.array([[0.1, -0.2], [-0.9, 0.1]]))
        assert V[1, 0] > 0 and V[0, 1] > 0
