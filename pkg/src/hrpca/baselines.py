"""Comparison methods: plain PCA, Mahalanobis iterative trimming, fast projection pursuit."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .linalg import as_points, orthonormalize, second_moment, fix_signs, top_eigs

COND_LIMIT = 1e12


class IllConditionedError(ValueError):
    """Covariance too ill-conditioned to invert (e.g. fewer points than dimensions)."""


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "pca"
    d: int = 1
    trim_fraction: float = 0.05
    iterations: int = 10
    trim_level: int | None = None  # pp; defaults to ceil(n/2)

    def __post_init__(self):
        if self.method not in ("pca", "mvt", "pp"):
            raise ValueError(f"unknown baseline {self.method!r}")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise ValueError(f"trim_fraction must lie in [0, 0.5), got {self.trim_fraction}")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


def pca_baseline(data, d: int = 1) -> np.ndarray:
    """Top-``d`` eigenvectors of the uncentred second moment ``(1/n) sum y yᵀ``."""
    Y = as_points(data, "data")
    return top_eigs(second_moment(Y), d).vectors


def mvt_kept_sets(data, trim_fraction: float = 0.05, iterations: int = 10) -> list[np.ndarray]:
    """Indices kept before each trimming step and after the last one.

    Each iteration fits mean and covariance on the kept points and drops the
    ``ceil(trim_fraction * kept)`` with largest Mahalanobis distance. Raises
    :class:`IllConditionedError` when the covariance cannot be inverted,
    which is always the case once the kept set is no larger than the
    dimension.
    """
    Y = as_points(data, "data")
    n, m = Y.shape
    kept = np.arange(n)
    history = [kept]
    for _ in range(iterations):
        X = Y[kept]
        if len(kept) <= m:
            raise IllConditionedError(
                f"covariance ill-conditioned: {len(kept)} kept points in dimension {m}"
            )
        mu = X.mean(axis=0)
        C = np.cov(X, rowvar=False).reshape(m, m)
        ev = np.linalg.eigvalsh(C)
        cond = ev[-1] / ev[0] if ev[0] > 0 else math.inf
        if not cond <= COND_LIMIT:
            raise IllConditionedError(f"covariance ill-conditioned (condition number {cond:.3g})")
        diff = X - mu
        dist2 = np.einsum("ij,ij->i", diff, np.linalg.solve(C, diff.T).T)
        drop = math.ceil(trim_fraction * len(kept))
        if drop:
            order = np.argsort(dist2, kind="stable")
            kept = np.sort(kept[order[: len(kept) - drop]])
        history.append(kept)
    return history


def mvt(data, d: int = 1, trim_fraction: float = 0.05, iterations: int = 10) -> np.ndarray:
    """Multivariate iterative trimming, then PCA on the final kept set.

    See :func:`mvt_kept_sets` for the trimming schedule and errors.
    """
    Y = as_points(data, "data")
    BaselineConfig("mvt", d, trim_fraction, iterations)
    kept = mvt_kept_sets(Y, trim_fraction, iterations)[-1]
    return top_eigs(second_moment(Y[kept]), d).vectors


def pp_approx(data, d: int = 1, trim_level: int | None = None) -> np.ndarray:
    """Projection pursuit restricted to the directions of the data points.

    Every nonzero point's direction is scored by the trimmed second moment
    ``(1/n) * sum of the trim_level smallest squared projections``; the best
    is kept, the data are deflated onto its orthogonal complement, and the
    search repeats ``d`` times.
    """
    X = as_points(data, "data").copy()
    n = X.shape[0]
    trim_level = math.ceil(n / 2) if trim_level is None else int(trim_level)
    if not 1 <= trim_level <= n:
        raise ValueError(f"trim_level must lie in [1, {n}], got {trim_level}")
    if n < d:
        raise ValueError(f"need at least d={d} points, got {n}")
    dirs = []
    for q in range(d):
        norms = np.linalg.norm(X, axis=1)
        top = norms.max() if n else 0.0
        ok = norms > 1e-12 * top if top > 0 else np.zeros(n, dtype=bool)
        if ok.sum() < d - q:
            raise ValueError(f"fewer than {d} nonzero candidate directions")
        cand = X[ok] / norms[ok, None]
        scores = _backend.core.trimmed_sums(np.ascontiguousarray(X @ cand.T), trim_level) / n
        w = cand[int(np.argmax(scores))]
        dirs.append(w)
        X = X - np.outer(X @ w, w)
    return fix_signs(orthonormalize(np.array(dirs).T))


def run_baseline(data, cfg: BaselineConfig) -> np.ndarray:
    if cfg.method == "pca":
        return pca_baseline(data, cfg.d)
    if cfg.method == "mvt":
        return mvt(data, cfg.d, cfg.trim_fraction, cfg.iterations)
    return pp_approx(data, cfg.d, cfg.trim_level)
