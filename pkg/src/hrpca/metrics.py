"""Expressed variance and the robust variance estimator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .linalg import as_basis, as_points


@dataclass(frozen=True)
class Score:
    """Expressed variance ``ev = h / h_bar``.

    ``h`` is the signal variance captured by the basis, ``h_bar`` the
    best achievable with the same number of directions.
    """

    ev: float
    h: float
    h_bar: float


def expressed_variance(basis, truth) -> Score:
    """Fraction of the signal variance ``‖Wᵀ A‖²_F`` captured by ``basis``.

    ``truth`` is a :class:`~hrpca.datagen.GroundTruth` or the ``(m, d)``
    system matrix itself. The normaliser is the sum of the top-``d``
    eigenvalues of ``A Aᵀ`` with ``d`` the number of basis vectors, which
    equals ``trace(A Aᵀ)`` when ``A`` has ``d`` columns.
    """
    A = np.asarray(getattr(truth, "A", truth), dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    W = as_basis(basis)
    if W.shape[0] != A.shape[0]:
        raise ValueError(
            f"basis dimension {W.shape[0]} does not match signal dimension {A.shape[0]}"
        )
    d = W.shape[1]
    sv = np.linalg.svd(A, compute_uv=False)
    h_bar = float(np.sum(np.sort(sv**2)[::-1][:d]))
    if h_bar <= 0.0:
        raise ValueError("signal matrix has no variance")
    h = float(np.sum((W.T @ A) ** 2))
    return Score(ev=h / h_bar, h=h, h_bar=h_bar)


def check_t_hat(t_hat: int, n: int) -> int:
    if int(t_hat) != t_hat or not 1 <= t_hat <= n:
        raise ValueError(f"t_hat must be an integer in [1, {n}], got {t_hat}")
    return int(t_hat)


def trimmed_variances(proj: np.ndarray, t_hat: int) -> np.ndarray:
    """Per-column robust variance of precomputed projections of all ``n`` points."""
    proj = np.asarray(proj, dtype=np.float64)
    if proj.ndim == 1:
        proj = proj[:, None]
    n = proj.shape[0]
    check_t_hat(t_hat, n)
    return _backend.core.trimmed_sums(proj, int(t_hat)) / n


def sum_directions(values: np.ndarray) -> float:
    total = 0.0
    for v in values:
        total += float(v)
    return total


def rve(basis, full_set, t_hat: int) -> float:
    """Robust variance estimator summed over the basis directions.

    For each direction the squared projections of every point are sorted,
    the ``t_hat`` smallest are summed and the result is divided by the total
    number of points ``n`` (not by ``t_hat``). Pass the full observed set,
    never a trimmed working set.
    """
    Y = as_points(full_set, "full_set")
    W = as_basis(basis, Y.shape[1])
    check_t_hat(t_hat, Y.shape[0])
    return sum_directions(trimmed_variances(Y @ W, t_hat))
