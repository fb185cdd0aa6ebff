"""Dense linear algebra used by every estimator in the package.

Conventions: a point set is an ``(n, m)`` array with one point per row, and
a basis is an ``(m, d)`` array whose columns are orthonormal directions.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

SYMMETRY_TOL = 1e-9


class EigPairs(NamedTuple):
    """Leading eigenpairs, values non-increasing, vectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


def as_points(points, name: str = "points") -> np.ndarray:
    Y = np.asarray(points, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise ValueError(f"{name} must be 2-D (n, m), got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValueError(f"{name} contains non-finite entries")
    return Y


def as_basis(basis, m: int | None = None) -> np.ndarray:
    W = np.asarray(basis, dtype=np.float64)
    if W.ndim == 1:
        W = W[:, None]
    if W.ndim != 2:
        raise ValueError(f"basis must be 2-D (m, d), got shape {W.shape}")
    if m is not None and W.shape[0] != m:
        raise ValueError(f"basis dimension {W.shape[0]} does not match data dimension {m}")
    return W


def second_moment(points, divisor: int | float | None = None) -> np.ndarray:
    """Return ``(1/divisor) * sum_i y_i y_iᵀ`` (uncentered).

    ``divisor`` defaults to the number of points.
    """
    Y = as_points(points)
    if Y.shape[0] == 0:
        raise ValueError("no points")
    if divisor is None:
        divisor = Y.shape[0]
    if divisor <= 0:
        raise ValueError(f"divisor must be positive, got {divisor}")
    return (Y.T @ Y) / divisor


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    V = np.array(vectors, dtype=np.float64, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def top_eigs(M, d: int) -> EigPairs:
    """The ``d`` largest eigenpairs of a symmetric matrix.

    Uses LAPACK's tridiagonal (MRRR) solver restricted to the top of the
    spectrum, so results are deterministic. Ties in a degenerate spectrum
    come back in solver order.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    k = M.shape[0]
    if not 0 <= d <= k:
        raise ValueError(f"requested {d} eigenpairs of a {k}x{k} matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if M.size and np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    if d == 0:
        return EigPairs(np.empty(0), np.empty((k, 0)))
    vals, vecs = scipy.linalg.eigh(M, subset_by_index=[k - d, k - 1])
    return EigPairs(vals[::-1].copy(), fix_signs(vecs[:, ::-1]))


def gram(points, kernel: Callable) -> np.ndarray:
    """Gram matrix ``K[i, j] = k(y_i, y_j)``.

    ``kernel`` is either an object with a vectorised ``pairwise(A, B)``
    method (see :mod:`hrpca.kernel`) or a plain two-argument callable.
    """
    Y = as_points(points)
    if Y.shape[0] == 0:
        raise ValueError("no points")
    pairwise = getattr(kernel, "pairwise", None)
    if pairwise is not None:
        return np.asarray(pairwise(Y, Y), dtype=np.float64)
    n = Y.shape[0]
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            K[i, j] = K[j, i] = float(kernel(Y[i], Y[j]))
    return K


def orthonormalize(vectors, tol: float = 1e-12) -> np.ndarray:
    """Modified Gram-Schmidt on the columns, keeping their order and sense.

    Raises if a column is (numerically) dependent on the previous ones.
    """
    V = np.array(vectors, dtype=np.float64, copy=True)
    if V.ndim == 1:
        V = V[:, None]
    for j in range(V.shape[1]):
        v = V[:, j]
        norm0 = np.linalg.norm(v)
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for i in range(j):
                v -= (V[:, i] @ v) * V[:, i]
        norm = np.linalg.norm(v)
        if norm0 == 0.0 or norm <= tol * norm0:
            raise ValueError(f"column {j} is linearly dependent on earlier columns")
        V[:, j] = v / norm
    return V
