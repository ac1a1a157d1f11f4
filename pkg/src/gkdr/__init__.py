"""Gradient-based kernel dimension reduction for supervised learning."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, GkdrError, NumericalError
from .estimators import (
    GkdrConfig,
    LowRankConfig,
    Projection,
    average_candidate,
    average_candidate_lowrank,
    candidate_matrix_at,
    fit,
    fit_gkdr,
    fit_gkdr_i,
    fit_gkdr_v,
    project,
)
from .evaluation import classification_error, run_synthetic_benchmark, subspace_error
from .kernels import KernelSpec, gaussian_kernel, gram, kernel_gradient_stack, median_heuristic, output_median
from .model_selection import CVConfig, cross_validate, knn_predict

__all__ = [
    "CVConfig", "ConfigError", "DataError", "GkdrConfig", "GkdrError", "KernelSpec",
    "LowRankConfig", "NumericalError", "Projection", "average_candidate",
    "average_candidate_lowrank", "candidate_matrix_at", "classification_error",
    "cross_validate", "fit", "fit_gkdr", "fit_gkdr_i", "fit_gkdr_v", "gaussian_kernel", "gram",
    "kernel_gradient_stack", "knn_predict", "median_heuristic", "output_median", "project",
    "run_synthetic_benchmark", "subspace_error",
]
