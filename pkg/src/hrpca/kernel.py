"""Kernel HR-PCA.

Directions live in the feature space of a kernel and are represented by
coefficients over the current working points,
``w_q = sum_j alpha_j(q) phi(y_j)``, so every projection is a weighted sum of
kernel evaluations. With the linear kernel the run reproduces
:func:`hrpca.algorithm.run` removal for removal.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .algorithm import (
    RANK_TOL,
    HrPcaConfig,
    IterationRecord,
    RunTrace,
    loop_length,
    sample_removal,
    usable_directions,
)
from .linalg import as_points, top_eigs
from .metrics import sum_directions, trimmed_variances


class RankDeficiencyWarning(RuntimeWarning):
    """Fewer than ``d`` Gram eigenvalues are numerically nonzero."""


@dataclass(frozen=True)
class KernelFn:
    """A positive semidefinite kernel: ``linear``, ``rbf`` or ``polynomial``.

    rbf: ``exp(-gamma * |a - b|^2)``; polynomial: ``(aᵀb + offset) ** degree``.
    """

    kind: str = "linear"
    gamma: float = 1.0
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("rbf kernel needs gamma > 0")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 0):
            raise ValueError("polynomial degree must be a non-negative integer")

    @classmethod
    def linear(cls) -> KernelFn:
        return cls("linear")

    @classmethod
    def rbf(cls, gamma: float = 1.0) -> KernelFn:
        return cls("rbf", gamma=gamma)

    @classmethod
    def polynomial(cls, degree: int = 2, offset: float = 1.0) -> KernelFn:
        return cls("polynomial", degree=degree, offset=offset)

    @classmethod
    def from_dict(cls, spec: dict) -> KernelFn:
        return cls(**spec)

    def pairwise(self, A, B) -> np.ndarray:
        A = as_points(A, "A")
        B = as_points(B, "B")
        G = A @ B.T
        if self.kind == "linear":
            return G
        if self.kind == "polynomial":
            return (G + self.offset) ** self.degree
        sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * G
        return np.exp(-self.gamma * np.maximum(sq, 0.0))

    def __call__(self, a, b) -> float:
        return float(self.pairwise(np.atleast_1d(a)[None, :], np.atleast_1d(b)[None, :])[0, 0])


class CenteredKernel:
    """Kernel of the feature map recentred on the mean image of ``anchors``.

    ``k^(a, b) = k(a, b) - mean_j k(a, y_j) - mean_i k(y_i, b) + mean_ij k(y_i, y_j)``
    """

    def __init__(self, base, anchors):
        self.base = base
        self.anchors = as_points(anchors, "anchors")
        if self.anchors.shape[0] == 0:
            raise ValueError("no anchor points")
        K = _pairwise(base, self.anchors, self.anchors)
        self._grand_mean = float(K.mean())

    def pairwise(self, A, B) -> np.ndarray:
        KAB = _pairwise(self.base, A, B)
        a_mean = _pairwise(self.base, A, self.anchors).mean(axis=1)
        b_mean = _pairwise(self.base, self.anchors, B).mean(axis=0)
        return KAB - a_mean[:, None] - b_mean[None, :] + self._grand_mean

    def __call__(self, a, b) -> float:
        return float(self.pairwise(np.atleast_1d(a)[None, :], np.atleast_1d(b)[None, :])[0, 0])


def _pairwise(kernel, A, B) -> np.ndarray:
    A = as_points(A, "A")
    B = as_points(B, "B")
    pairwise = getattr(kernel, "pairwise", None)
    if pairwise is not None:
        return np.asarray(pairwise(A, B), dtype=np.float64)
    return np.array([[float(kernel(a, b)) for b in B] for a in A]).reshape(len(A), len(B))


def center_kernel(kernel, anchor_set) -> CenteredKernel:
    """Centre ``kernel`` on the full observed set ``anchor_set``."""
    return CenteredKernel(kernel, anchor_set)


def _kernel_pca(K: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Top-``d`` kernel PCA; returns (sigmas, alphas, dropped)."""
    n = K.shape[0]
    if not 0 <= d <= n:
        raise ValueError(f"requested {d} components from a {n}x{n} Gram matrix")
    vals, vecs = top_eigs(K, d)
    trace = float(np.trace(K))
    # round-off negatives are clamped to zero, then zeros are dropped
    vals = np.where((vals < 0) & (vals > -RANK_TOL * abs(trace)), 0.0, vals)
    keep = usable_directions(vals, trace)
    sig = np.sqrt(vals[keep])
    alphas = vecs[:, keep] / sig
    return sig, alphas, int(d - keep.sum())


def kernel_pca(K, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Leading ``d`` components of a Gram matrix.

    Returns ``sigmas`` (square roots of the eigenvalues) and ``alphas`` of
    shape ``(n, d)`` with ``alphas[:, q] = u_q / sigma_q`` for unit
    eigenvectors ``u_q``, so that ``alpha_qᵀ K alpha_q = 1``. Directions whose
    eigenvalue is below ``1e-10 * trace(K)`` are dropped with a
    :class:`RankDeficiencyWarning`.
    """
    K = np.asarray(K, dtype=np.float64)
    sig, alphas, dropped = _kernel_pca(K, d)
    if dropped:
        warnings.warn(
            f"Gram matrix has only {d - dropped} usable directions out of {d}",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    return sig, alphas


def kernel_project(alphas, support_points, kernel, query) -> np.ndarray | float:
    """Feature-space projection ``sum_j alpha_j k(y_j, v)``.

    ``alphas`` may be a single coefficient vector or an ``(n_support, d)``
    matrix; ``query`` a single point or an ``(n_query, m)`` array. Returns a
    scalar for a single vector and a single point.
    """
    S = as_points(support_points, "support_points")
    a = np.asarray(alphas, dtype=np.float64)
    single_alpha = a.ndim == 1
    if single_alpha:
        a = a[:, None]
    if a.shape[0] != S.shape[0]:
        raise ValueError(f"{a.shape[0]} coefficients for {S.shape[0]} support points")
    q = np.asarray(query, dtype=np.float64)
    single_query = q.ndim == 1 and S.shape[1] == q.shape[0]
    Q = q[None, :] if single_query else as_points(q, "query")
    out = _pairwise(kernel, Q, S) @ a
    if single_alpha:
        out = out[:, 0]
    if single_query:
        return float(out[0]) if single_alpha else out[0]
    return out


@dataclass
class KernelModel:
    """Champion of a kernel HR-PCA run.

    ``coefficients`` is ``(n_support, r)`` with ``r <= d`` (``r < d`` only
    when the Gram matrix was rank deficient). ``kernel`` is the kernel the
    run used, already centred if centring was requested.
    """

    coefficients: np.ndarray
    support_points: np.ndarray
    support_indices: np.ndarray
    kernel: object

    @property
    def rank(self) -> int:
        return self.coefficients.shape[1]

    def project(self, X) -> np.ndarray:
        """Projections of the rows of ``X`` onto the champion directions."""
        return kernel_project(self.coefficients, self.support_points, self.kernel, as_points(X))

    def gram(self) -> np.ndarray:
        return _pairwise(self.kernel, self.support_points, self.support_points)

    def input_space_basis(self) -> np.ndarray:
        """Explicit ``(m, r)`` basis; only defined for the linear kernel."""
        base = self.kernel.base if isinstance(self.kernel, CenteredKernel) else self.kernel
        if not (isinstance(base, KernelFn) and base.kind == "linear"):
            raise ValueError("explicit directions exist only for the linear kernel")
        X = self.support_points
        if isinstance(self.kernel, CenteredKernel):
            X = X - self.kernel.anchors.mean(axis=0)
        return X.T @ self.coefficients


@dataclass
class KernelHrPcaResult:
    model: KernelModel
    opt: float
    trace: RunTrace
    rank_deficient_rounds: int = 0


def run_kernel(data, kernel=None, cfg: HrPcaConfig | None = None) -> KernelHrPcaResult:
    """Kernel HR-PCA with the same control flow and RNG use as :func:`hrpca.algorithm.run`.

    With ``cfg.center`` the kernel is centred once on the full data set and
    stays fixed while points are removed.
    """
    Y = as_points(data, "data")
    n, m = Y.shape
    cfg = (cfg or HrPcaConfig()).resolve(n, m)
    kernel = KernelFn.linear() if kernel is None else kernel
    if cfg.center:
        kernel = center_kernel(kernel, Y)

    K_full = _pairwise(kernel, Y, Y)
    K_full = 0.5 * (K_full + K_full.T)
    K = K_full.copy()
    remaining = np.arange(n)
    rng = np.random.default_rng(cfg.seed)
    trace = RunTrace()
    opt = 0.0
    champion: KernelModel | None = None
    deficient = 0

    for s in range(loop_length(n, cfg)):
        _, alphas, dropped = _kernel_pca(K, cfg.d)
        deficient += bool(dropped)
        proj = K_full[:, remaining] @ alphas  # all n original points
        value = sum_directions(trimmed_variances(proj, cfg.t_hat))
        opt_before = opt
        updated = not dropped and value > opt
        if updated or champion is None:
            if updated:
                opt = value
            champion = KernelModel(alphas, Y[remaining].copy(), remaining.copy(), kernel)

        k = sample_removal(_backend.core.row_sq_norms(proj[remaining]), rng)
        removed = int(remaining[k])
        K = np.delete(np.delete(K, k, axis=0), k, axis=1)
        remaining = np.delete(remaining, k)
        trace.records.append(IterationRecord(s, removed, value, opt_before, updated, alphas.shape[1]))

    if deficient:
        warnings.warn(
            f"Gram matrix rank deficient in {deficient} of {len(trace)} rounds",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    trace.opt = opt
    return KernelHrPcaResult(champion, opt, trace, deficient)
