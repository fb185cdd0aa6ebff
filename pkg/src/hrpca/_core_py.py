"""NumPy implementations of the compiled kernels in ``_core.pyx``.

Accumulation order mirrors the compiled code so both backends return
identical floats.
"""
from __future__ import annotations

import numpy as np


def trimmed_sums(proj: np.ndarray, t: int) -> np.ndarray:
    proj = np.asarray(proj, dtype=np.float64)
    n, d = proj.shape
    if t < 0 or t > n:
        raise ValueError(f"trim count {t} outside [0, {n}]")
    if t == 0:
        return np.zeros(d)
    sq = np.sort(proj * proj, axis=0)[:t]
    # cumsum accumulates sequentially, unlike sum()'s pairwise reduction
    return np.cumsum(sq, axis=0)[-1].copy()


def row_sq_norms(proj: np.ndarray) -> np.ndarray:
    proj = np.asarray(proj, dtype=np.float64)
    out = np.zeros(proj.shape[0])
    for j in range(proj.shape[1]):
        col = proj[:, j]
        out += col * col
    return out


def sample_index(weights: np.ndarray, u: float) -> int:
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    if n == 0:
        raise ValueError("no points to sample from")
    cum = np.cumsum(weights)
    total = cum[-1]
    if not total > 0.0:
        return min(int(u * n), n - 1)
    i = int(np.searchsorted(cum, u * total, side="right"))
    if i >= n:
        return int(np.flatnonzero(weights > 0.0)[-1])
    return i


def rank1_downdate(S: np.ndarray, y: np.ndarray) -> None:
    if S.shape != (y.shape[0], y.shape[0]):
        raise ValueError("shape mismatch in rank-1 downdate")
    S -= np.outer(y, y)
