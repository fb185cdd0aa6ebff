"""HR-PCA: alternate PCA with randomised removal of high-variance points.

Each round runs PCA on the current working set, scores the candidate
directions with the robust variance estimator on the *original* data, keeps
the best-scoring candidate so far, and removes one working point with
probability proportional to its squared projection onto the candidates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .linalg import as_basis, as_points, top_eigs
from .metrics import check_t_hat, sum_directions, trimmed_variances


@dataclass(frozen=True)
class HrPcaConfig:
    """Run parameters.

    ``t_bar`` (max removals) defaults to ``n - 1``; ``t_hat`` (trim level of
    the robust variance estimator) defaults to ``ceil(n / 2)``. Either way
    the loop stops once only ``d + 1`` points remain.
    """

    d: int = 1
    t_bar: int | None = None
    t_hat: int | None = None
    seed: int = 0
    center: bool = False

    def resolve(self, n: int, m: int) -> HrPcaConfig:
        """Fill defaults for an ``(n, m)`` data set and validate."""
        if not 1 <= self.d <= m:
            raise ValueError(f"d must be in [1, {m}], got {self.d}")
        if n < self.d + 1:
            raise ValueError(f"need at least d+1={self.d + 1} points, got {n}")
        t_bar = n - 1 if self.t_bar is None else self.t_bar
        t_hat = math.ceil(n / 2) if self.t_hat is None else self.t_hat
        if int(t_bar) != t_bar or not 0 <= t_bar <= n - 1:
            raise ValueError(f"t_bar must be an integer in [0, {n - 1}], got {t_bar}")
        check_t_hat(t_hat, n)
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return replace(self, t_bar=int(t_bar), t_hat=int(t_hat), seed=int(self.seed))


@dataclass(frozen=True)
class IterationRecord:
    s: int
    removed: int  # index into the original data set
    value: float  # summed RVE of this round's candidates
    opt_before: float
    champion_updated: bool
    usable: int = -1  # candidate directions with nonzero variance; < d marks a rank-deficient round


@dataclass
class RunTrace:
    records: list[IterationRecord] = field(default_factory=list)
    opt: float = 0.0

    @property
    def removed_indices(self) -> list[int]:
        return [r.removed for r in self.records]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class HrPcaResult:
    basis: np.ndarray  # (m, d), orthonormal columns
    opt: float
    trace: RunTrace
    mean: np.ndarray | None = None  # subtracted before the loop when centering


def removal_weights(basis, remaining) -> np.ndarray:
    """Unnormalised removal probabilities ``sum_j (w_jᵀ y_i)^2``."""
    Y = as_points(remaining, "remaining")
    if Y.shape[0] == 0:
        raise ValueError("no points")
    W = as_basis(basis, Y.shape[1])
    return _backend.core.row_sq_norms(Y @ W)


def sample_removal(weights, rng: np.random.Generator) -> int:
    """Draw one index by cumulative-weight inversion of a single uniform.

    All-zero weights fall back to a uniform pick from the same draw, so
    every call consumes exactly one value from ``rng``.
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    return int(_backend.core.sample_index(w, float(rng.random())))


RANK_TOL = 1e-10


def usable_directions(eigenvalues: np.ndarray, trace: float) -> np.ndarray:
    """Mask of eigenvalues above ``RANK_TOL * trace``.

    A working set spanning fewer than ``d`` dimensions leaves null-space
    eigenvectors that are arbitrary; they are excluded from scoring and
    removal, and such a round may not become champion.
    """
    tol = RANK_TOL * max(float(trace), 0.0)
    return (eigenvalues > tol) & (eigenvalues > 0.0)


def loop_length(n: int, cfg: HrPcaConfig) -> int:
    """Number of PCA rounds: ``t_bar + 1``, capped so ``d + 1`` points remain."""
    return min(cfg.t_bar, n - cfg.d - 1) + 1


def run(data, cfg: HrPcaConfig | None = None) -> HrPcaResult:
    """Run HR-PCA on an ``(n, m)`` point set."""
    Y = as_points(data, "data")
    n, m = Y.shape
    cfg = (cfg or HrPcaConfig()).resolve(n, m)
    mean = None
    if cfg.center:
        mean = Y.mean(axis=0)
        Y = Y - mean

    rng = np.random.default_rng(cfg.seed)
    remaining = np.arange(n)
    S = np.ascontiguousarray(Y.T @ Y)  # running sum of outer products of the working set
    trace = RunTrace()
    opt = 0.0
    champion = None

    for s in range(loop_length(n, cfg)):
        sigma = S / (n - s)
        vals, W = top_eigs(sigma, cfg.d)
        keep = usable_directions(vals, np.trace(sigma))
        proj = Y @ W[:, keep]
        value = sum_directions(trimmed_variances(proj, cfg.t_hat))
        opt_before = opt
        updated = bool(keep.all()) and value > opt
        if updated:
            opt, champion = value, W
        elif champion is None:
            # nothing has scored above zero yet; hold the first candidate
            champion = W

        k = sample_removal(_backend.core.row_sq_norms(proj[remaining]), rng)
        removed = int(remaining[k])
        _backend.core.rank1_downdate(S, np.ascontiguousarray(Y[removed]))
        remaining = np.delete(remaining, k)
        trace.records.append(IterationRecord(s, removed, value, opt_before, updated, int(keep.sum())))

    trace.opt = opt
    return HrPcaResult(basis=champion, opt=opt, trace=trace, mean=mean)
