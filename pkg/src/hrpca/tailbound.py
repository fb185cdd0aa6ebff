"""Tail weight of a one-dimensional marginal and the asymptotic E.V. lower bound.

For a symmetric, unit-variance marginal, ``c_alpha`` is the half-width of
the central interval holding mass ``alpha`` and ``tail_weight(alpha)`` is the
second moment contributed by that interval. The asymptotic lower bound on
expressed variance is

    max_k  V(1 - lam (1 + k) / ((1 - lam) k)) / (1 + k)
         * V(r - lam / (1 - lam)) / V(r)

where ``lam`` is the contamination level and ``r = t_hat / t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class TailModel:
    """A zero-mean, unit-variance symmetric marginal.

    ``kind`` is ``"gaussian"``, ``"uniform"`` (on ``[-sqrt3, sqrt3]``) or
    ``"empirical"``; build the latter with :meth:`empirical`, which
    standardises the samples.
    """

    kind: str = "gaussian"
    tol: float = 1e-12
    abs_sorted: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform", "empirical"):
            raise ValueError(f"unknown tail model {self.kind!r}")
        if self.kind == "empirical" and len(self.abs_sorted) < 2:
            raise ValueError("empirical model needs at least two samples")

    @classmethod
    def gaussian(cls) -> TailModel:
        return cls("gaussian")

    @classmethod
    def uniform(cls) -> TailModel:
        return cls("uniform")

    @classmethod
    def empirical(cls, samples) -> TailModel:
        x = np.asarray(samples, dtype=np.float64).ravel()
        if x.size < 2 or not np.all(np.isfinite(x)):
            raise ValueError("empirical model needs at least two finite samples")
        x = x - x.mean()
        std = x.std()
        if std == 0:
            raise ValueError("samples have zero variance")
        return cls("empirical", abs_sorted=tuple(np.sort(np.abs(x / std))))

    @classmethod
    def from_name(cls, name: str) -> TailModel:
        if name == "empirical":
            raise ValueError("empirical models are built from samples")
        return cls(name)

    def density(self, x: float) -> float:
        if self.kind == "gaussian":
            return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if self.kind == "uniform":
            return 1.0 / (2.0 * SQRT3) if abs(x) <= SQRT3 else 0.0
        raise ValueError("empirical model has no density")

    def central_mass(self, c: float) -> float:
        """Probability of ``[-c, c]``."""
        if c <= 0:
            return 0.0
        if self.kind == "gaussian":
            return math.erf(c / math.sqrt(2.0))
        if self.kind == "uniform":
            return min(c / SQRT3, 1.0)
        a = np.asarray(self.abs_sorted)
        return float(np.searchsorted(a, c, side="right")) / a.size


def c_alpha(model: TailModel, alpha: float) -> float:
    """Half-width ``c`` with ``P([-c, c]) = alpha``, by bisection.

    Returns ``inf`` for ``alpha = 1`` under an unbounded marginal.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return 0.0
    if model.kind == "empirical":
        return _empirical_c(model, alpha)
    if alpha == 1.0:
        return SQRT3 if model.kind == "uniform" else math.inf
    lo, hi = 0.0, 1.0
    while model.central_mass(hi) < alpha:
        lo, hi = hi, 2.0 * hi
    while hi - lo > model.tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if model.central_mass(mid) < alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _empirical_position(model: TailModel, alpha: float) -> tuple[int, float]:
    k = alpha * len(model.abs_sorted)
    i = int(math.floor(k))
    return i, k - i


def _empirical_c(model: TailModel, alpha: float) -> float:
    a = model.abs_sorted
    i, frac = _empirical_position(model, alpha)
    if i >= len(a):
        return a[-1]
    lower = a[i - 1] if i > 0 else 0.0
    return lower + frac * (a[i] - lower)


def tail_weight(model: TailModel, alpha: float) -> float:
    """Second moment of the central ``alpha`` mass.

    Extended by convention to 0 below 0 and ``inf`` above 1.
    """
    if alpha < 0.0:
        return 0.0
    if alpha > 1.0:
        return math.inf
    if alpha == 0.0:
        return 0.0
    if alpha == 1.0:
        return 1.0
    if model.kind == "empirical":
        # linear interpolation of the partial sums of sorted squares
        sq = np.asarray(model.abs_sorted) ** 2
        i, frac = _empirical_position(model, alpha)
        partial = float(np.sum(sq[:i]))
        if i < sq.size:
            partial += frac * sq[i]
        return float(partial / sq.size)
    c = c_alpha(model, alpha)
    val, _ = integrate.quad(lambda x: x * x * model.density(x), -c, c, epsabs=1e-14, epsrel=1e-12)
    return val


@dataclass(frozen=True)
class BoundQuery:
    """Contamination ``lambda_star`` in [0, 0.5), ``t_hat_ratio = t_hat / t``.

    The bound is positive only when ``t_hat_ratio`` exceeds
    ``lambda_star / (1 - lambda_star)``; below that it is 0.
    ``kappa_grid`` defaults to 2000 log-spaced points on [1e-4, 1e4].
    """

    lambda_star: float
    t_hat_ratio: float = 1.0
    kappa_grid: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.lambda_star < 0.5:
            raise ValueError(f"lambda_star must lie in [0, 0.5), got {self.lambda_star}")
        if not 0.0 < self.t_hat_ratio <= 1.0:
            raise ValueError(f"t_hat_ratio must lie in (0, 1], got {self.t_hat_ratio}")
        if self.kappa_grid is not None and (
            len(self.kappa_grid) == 0 or min(self.kappa_grid) <= 0
        ):
            raise ValueError("kappa grid must be a non-empty set of positive values")

    def kappas(self) -> np.ndarray:
        if self.kappa_grid is None:
            return np.logspace(-4, 4, 2000)
        return np.sort(np.asarray(self.kappa_grid, dtype=np.float64))


def _removal_term(model: TailModel, lam: float, kappa: float) -> float:
    return tail_weight(model, 1.0 - lam * (1.0 + kappa) / ((1.0 - lam) * kappa)) / (1.0 + kappa)


def asymptotic_bound(model: TailModel, q: BoundQuery) -> float:
    """Asymptotic lower bound on expressed variance, maximised over kappa.

    Grid search over ``q.kappas()`` followed by a golden-section refinement
    in ``log kappa`` around the best interior grid point.
    """
    lam, r = q.lambda_star, q.t_hat_ratio
    denom = tail_weight(model, r)
    if denom == 0.0:
        raise ValueError(f"trim level below contamination: V(t_hat/t) = 0 at t_hat/t={r}")
    trim_term = tail_weight(model, r - lam / (1.0 - lam)) / denom
    if trim_term == 0.0:
        # t_hat/t <= lambda/(1-lambda): the bound is vacuous
        return 0.0

    kappas = q.kappas()
    vals = np.array([_removal_term(model, lam, k) for k in kappas])
    i = int(np.argmax(vals))
    best = float(vals[i])
    if 0 < i < len(kappas) - 1 and best > 0:
        log_k = np.log(kappas)
        res = optimize.minimize_scalar(
            lambda x: -_removal_term(model, lam, math.exp(x)),
            bracket=(log_k[i - 1], log_k[i], log_k[i + 1]),
            method="golden",
            options={"xtol": 1e-10},
        )
        best = max(best, -float(res.fun))
    return best * trim_term


def bound_curve(model: TailModel, lambdas, t_hat_ratio: float, kappa_grid=None) -> list[tuple[float, float]]:
    """``[(lambda, bound), ...]`` over the given contamination levels."""
    return [
        (float(lam), asymptotic_bound(model, BoundQuery(float(lam), t_hat_ratio, kappa_grid)))
        for lam in lambdas
    ]
