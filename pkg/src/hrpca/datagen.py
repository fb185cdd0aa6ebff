"""Synthetic contaminated data: low-rank signal plus noise, outliers on random lines.

Authentic points are ``z = A x + n`` with ``A`` an ``(m, d)`` matrix whose
singular values all equal ``sigma``, ``x`` drawn from the signal marginal
and ``n ~ N(0, I_m)``. The ``n - t`` outliers sit on ``outlier_lines``
random lines through the origin with coefficients uniform on
``[-sigma*mag, sigma*mag]`` and carry no noise.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

SIGNAL_MARGINALS = ("gaussian", "uniform")


@dataclass(frozen=True)
class GenSpec:
    n: int
    m: int
    d: int = 1
    lam: float = 0.0
    sigma: float = 1.0
    mag: float = 1.0
    outlier_lines: int | None = None  # defaults to d
    signal_marginal: str = "gaussian"
    seed: int = 0
    noise_scale: float = 1.0  # 0 disables the noise (diagnostics only)

    def __post_init__(self):
        for name in ("lam", "sigma", "mag", "noise_scale"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.n < 1 or self.m < 1 or self.d < 1 or self.d > self.m:
            raise ValueError(f"invalid sizes n={self.n}, m={self.m}, d={self.d}")
        if not 0.0 <= self.lam < 0.5:
            raise ValueError(f"lambda must lie in [0, 0.5), got {self.lam}")
        if not self.sigma > 0 or not self.mag > 0:
            raise ValueError("sigma and mag must be positive")
        if self.signal_marginal not in SIGNAL_MARGINALS:
            raise ValueError(f"signal_marginal must be one of {SIGNAL_MARGINALS}")
        if self.outlier_lines is not None and self.outlier_lines < 1:
            raise ValueError("outlier_lines must be at least 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.t < self.d + 1:
            raise ValueError(f"only {self.t} authentic points for d={self.d}")

    @property
    def t(self) -> int:
        """Number of authentic points."""
        return int(round((1.0 - self.lam) * self.n))

    @property
    def lines(self) -> int:
        return self.d if self.outlier_lines is None else self.outlier_lines

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> GenSpec:
        raw = dict(raw)
        if "lambda" in raw:
            raw["lam"] = raw.pop("lambda")
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown generator fields: {sorted(unknown)}")
        return cls(**raw)


@dataclass
class GroundTruth:
    A: np.ndarray
    authentic_indices: np.ndarray
    outlier_indices: np.ndarray
    spec: GenSpec | None = None
    # aligned with authentic_indices; absent when loaded from disk
    signals: np.ndarray | None = field(default=None, repr=False)
    noise: np.ndarray | None = field(default=None, repr=False)
    line_directions: np.ndarray | None = field(default=None, repr=False)


def system_matrix(rng: np.random.Generator, m: int, d: int, sigma: float) -> np.ndarray:
    """Gaussian ``(m, d)`` matrix with its spectrum replaced by ``sigma``."""
    Q, R = np.linalg.qr(rng.standard_normal((m, d)))
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return sigma * Q


def generate(spec: GenSpec) -> tuple[np.ndarray, GroundTruth]:
    """Draw an ``(n, m)`` contaminated point set and its ground truth.

    Points are shuffled; ``truth`` records which rows are outliers.
    """
    rng = np.random.default_rng(spec.seed)
    n, m, d, t = spec.n, spec.m, spec.d, spec.t
    A = system_matrix(rng, m, d, spec.sigma)

    if spec.signal_marginal == "gaussian":
        x = rng.standard_normal((t, d))
    else:
        # coordinatewise, so spherical symmetry is only approximate
        x = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=(t, d))
    noise = spec.noise_scale * rng.standard_normal((t, m))
    authentic = x @ A.T + noise

    dirs = rng.standard_normal((spec.lines, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    half = spec.sigma * spec.mag
    coef = rng.uniform(-half, half, size=n - t)
    outliers = coef[:, None] * dirs[np.arange(n - t) % spec.lines]

    perm = rng.permutation(n)  # row p of the output is source row perm[p]
    Y = np.vstack([authentic, outliers])[perm]
    is_auth = perm < t
    auth_idx = np.flatnonzero(is_auth)
    truth = GroundTruth(
        A=A,
        authentic_indices=auth_idx,
        outlier_indices=np.flatnonzero(~is_auth),
        spec=spec,
        signals=x[perm[auth_idx]],
        noise=noise[perm[auth_idx]],
        line_directions=dirs,
    )
    return Y, truth


@dataclass(frozen=True)
class NoiseReport:
    mean_noise_norm: float
    noise_norm_ratio: float  # mean noise norm / sqrt(m)
    mean_abs_cos: float  # authentic points vs. the signal subspace


def noise_explosion_report(truth: GroundTruth, data) -> NoiseReport:
    """How much noise dominates the authentic points.

    ``mean_abs_cos`` is the mean over authentic points of the cosine of
    their angle to ``col(A)``, i.e. ``|P_A z| / |z|``.
    """
    Y = np.asarray(data, dtype=np.float64)
    m = Y.shape[1]
    Z = Y[truth.authentic_indices]
    if truth.noise is not None:
        noise_norms = np.linalg.norm(truth.noise, axis=1)
    else:
        noise_norms = np.full(len(Z), np.nan)
    mean_noise = float(noise_norms.mean()) if len(Z) else math.nan
    Q, _ = np.linalg.qr(truth.A)
    z_norm = np.linalg.norm(Z, axis=1)
    ok = z_norm > 0
    cos = np.linalg.norm(Z[ok] @ Q, axis=1) / z_norm[ok]
    return NoiseReport(mean_noise, mean_noise / math.sqrt(m), float(cos.mean()) if cos.size else math.nan)


def truth_path(data_path) -> Path:
    p = Path(data_path)
    return p.with_name(p.name + ".truth.json")


def save_dataset(path, Y: np.ndarray, truth: GroundTruth) -> tuple[Path, Path]:
    """Write the point matrix and its truth sidecar ``<path>.truth.json``.

    The matrix file has one point per row (space separated, round-trip
    precision) under a header ``# n m d lambda seed``.
    """
    path = Path(path)
    spec = truth.spec
    n, m = Y.shape
    d = truth.A.shape[1]
    lam = spec.lam if spec else len(truth.outlier_indices) / n
    seed = spec.seed if spec else 0
    header = f"{n} {m} {d} {lam!r} {seed}"
    np.savetxt(path, Y, fmt="%.17g", header=header, comments="# ")
    sidecar = {
        "outlier_indices": [int(i) for i in truth.outlier_indices],
        "A": truth.A.tolist(),
        "spec": spec.to_dict() if spec else None,
    }
    tpath = truth_path(path)
    tpath.write_text(json.dumps(sidecar, indent=1) + "\n")
    return path, tpath


def read_header(path) -> dict:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("#"):
        raise ValueError(f"{path}: missing '# n m d lambda seed' header")
    parts = first[1:].split()
    if len(parts) != 5:
        raise ValueError(f"{path}: malformed header {first.strip()!r}")
    n, m, d, lam, seed = parts
    return {"n": int(n), "m": int(m), "d": int(d), "lambda": float(lam), "seed": int(seed)}


def load_dataset(path) -> tuple[np.ndarray, dict, GroundTruth | None]:
    """Read a dataset file; truth is ``None`` when the sidecar is missing."""
    header = read_header(path)
    Y = np.loadtxt(path, ndmin=2, comments="#")
    if Y.shape != (header["n"], header["m"]):
        raise ValueError(f"{path}: header says {header['n']}x{header['m']}, found {Y.shape}")
    tpath = truth_path(path)
    truth = None
    if tpath.exists():
        raw = json.loads(tpath.read_text())
        out_idx = np.array(sorted(raw["outlier_indices"]), dtype=np.int64)
        mask = np.ones(header["n"], dtype=bool)
        mask[out_idx] = False
        spec = GenSpec.from_dict(raw["spec"]) if raw.get("spec") else None
        truth = GroundTruth(
            A=np.array(raw["A"], dtype=np.float64).reshape(header["m"], -1),
            authentic_indices=np.flatnonzero(mask),
            outlier_indices=out_idx,
            spec=spec,
        )
    return Y, header, truth
