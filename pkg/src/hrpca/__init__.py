"""High-dimensional robust PCA.

HR-PCA alternates PCA with randomised removal of points, scoring each
candidate basis with a trimmed variance of the original data. Includes a
kernel variant, baselines, asymptotic performance bounds and a synthetic
experiment harness.
"""
from ._backend import BACKEND
from .algorithm import HrPcaConfig, HrPcaResult, RunTrace, removal_weights, run
from .baselines import BaselineConfig, IllConditionedError, mvt, pca_baseline, pp_approx
from .datagen import GenSpec, GroundTruth, generate, noise_explosion_report
from .kernel import KernelFn, KernelModel, center_kernel, kernel_pca, kernel_project, run_kernel
from .linalg import EigPairs, gram, second_moment, top_eigs
from .metrics import Score, expressed_variance, rve
from .tailbound import BoundQuery, TailModel, asymptotic_bound, bound_curve, c_alpha, tail_weight

__all__ = [
    "BACKEND",
    "BaselineConfig",
    "BoundQuery",
    "EigPairs",
    "GenSpec",
    "GroundTruth",
    "HrPcaConfig",
    "HrPcaResult",
    "IllConditionedError",
    "KernelFn",
    "KernelModel",
    "RunTrace",
    "Score",
    "TailModel",
    "asymptotic_bound",
    "bound_curve",
    "c_alpha",
    "center_kernel",
    "expressed_variance",
    "generate",
    "gram",
    "kernel_pca",
    "kernel_project",
    "mvt",
    "noise_explosion_report",
    "pca_baseline",
    "pp_approx",
    "removal_weights",
    "run",
    "run_kernel",
    "rve",
    "second_moment",
    "tail_weight",
    "top_eigs",
]
