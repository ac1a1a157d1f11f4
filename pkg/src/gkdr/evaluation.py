"""Subspace and classification error metrics, and the synthetic benchmark runner."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .data import SYNTHETIC, derive_seed
from .errors import ConfigError, GkdrError
from .estimators import GkdrConfig, fit, normalize_method
from .kernels import KernelSpec, median_heuristic, output_median
from .model_selection import CVConfig, cross_validate


def _check_orthonormal(B, name):
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if np.linalg.norm(B.T @ B - np.eye(B.shape[1])) > 1e-6:
        raise ConfigError(f"{name} does not have orthonormal columns")
    return B


def subspace_error(B0, B):
    """||B0 B0^T (I - B B^T)||_F / d, with d the column count of ``B``."""
    B0 = _check_orthonormal(B0, "B0")
    B = _check_orthonormal(B, "B")
    if B0.shape[0] != B.shape[0]:
        raise ConfigError("B0 and B live in spaces of different dimension")
    # B0 B0^T (I - B B^T) = B0 (B0^T - (B0^T B) B^T); ||B0 K||_F = ||K||_F
    K = B0.T - (B0.T @ B) @ B.T
    return float(np.linalg.norm(K) / B.shape[1])


def classification_error(predictions, truth):
    predictions, truth = np.asarray(predictions), np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ConfigError("predictions and truth differ in length")
    if predictions.size == 0:
        raise ConfigError("no predictions to score")
    return float(np.mean(predictions != truth))


@dataclass
class BenchmarkResult:
    dataset: str
    n: int
    method: str
    replications: int
    mean_error: float
    std_error: float  # sample standard deviation across replications
    sem: float  # standard error of the mean
    per_replication_errors: list
    wall_time_seconds: float
    singleton: bool = False
    selected_multipliers: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    seed: int = 0

    def to_dict(self):
        return asdict(self)

    def table_row(self):
        return (f"({self.dataset}) n={self.n:<4d} {self.method:<7s} "
                f"{self.mean_error:.4f} ({self.std_error:.4f})  [{self.replications} reps, "
                f"{self.wall_time_seconds:.1f}s]")


def run_replication(dataset, n, method, seed, cv=None, multiplier=None, **fit_options):
    """One replication: generate, select the bandwidth, fit, score against B0.

    Returns ``(error, selected multiplier)``.  With ``multiplier`` given the
    cross-validation step is skipped.
    """
    ds = SYNTHETIC[dataset](n, seed)
    d = ds.B0.shape[1]
    if multiplier is None:
        cv = cv or CVConfig()
        cv = replace(cv, task="regression", seed=seed)
        report = cross_validate(ds.X, ds.Y, d, cv, method, **fit_options)
        spec = report.spec
        multiplier = report.selected[0]
    else:
        eps = cv.epsilons[0] if cv else 1e-7
        spec = KernelSpec(multiplier * median_heuristic(ds.X),
                          multiplier * output_median(ds.Y), eps)
    proj = fit(ds.X, ds.Y, method, GkdrConfig(d=d, spec=spec, **fit_options))
    return subspace_error(ds.B0, proj.B), multiplier


def run_synthetic_benchmark(dataset, n, method="gkdr", replications=100, seed=0, cv=None,
                            multiplier=None, threads=1, **fit_options):
    """Repeat :func:`run_replication` with per-replication seeds derived from ``seed``.

    Replication ``i`` uses ``derive_seed(seed, i)``, so any single replication
    can be rerun on its own.  A replication that raises is recorded in
    ``failures`` and left out of the statistics.
    """
    if dataset not in ("A", "B"):
        raise ConfigError(f"unknown synthetic dataset {dataset!r}")
    if replications < 1:
        raise ConfigError("replications must be at least 1")
    method = normalize_method(method)
    start = time.perf_counter()

    def one(i):
        try:
            return run_replication(dataset, n, method, derive_seed(seed, i), cv, multiplier,
                                   **fit_options)
        except GkdrError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(one, range(replications)))
    else:
        outcomes = [one(i) for i in range(replications)]

    errors, mults, failures = [], [], []
    for i, out in enumerate(outcomes):
        if isinstance(out, Exception):
            failures.append({"replication": i, "error": str(out)})
        else:
            errors.append(out[0])
            mults.append(out[1])
    if not errors:
        raise ConfigError(f"all {replications} replications failed: {failures[0]['error']}")
    errs = np.array(errors)
    singleton = errs.size == 1
    std = 0.0 if singleton else float(errs.std(ddof=1))
    return BenchmarkResult(
        dataset=dataset, n=int(n), method=method, replications=int(errs.size),
        mean_error=float(errs.mean()), std_error=std, sem=std / np.sqrt(errs.size),
        per_replication_errors=[float(e) for e in errs],
        wall_time_seconds=time.perf_counter() - start, singleton=singleton,
        selected_multipliers=mults, failures=failures, seed=int(seed),
    )
