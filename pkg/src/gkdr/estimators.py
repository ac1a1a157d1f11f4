"""Gradient-based kernel dimension reduction and its iterative / projector-averaging variants.

For a sample ``(X_i, Y_i)`` the candidate matrix at a point ``x`` is::

    M(x) = grad_k(x)^T (G_X + n eps I)^{-1} G_Y (G_X + n eps I)^{-1} grad_k(x)

where ``grad_k(x)`` is the ``n x m`` stack returned by
:func:`gkdr.kernels.kernel_gradient_stack`.  Writing ``G_Y = L L^T`` and
``F = (G_X + n eps I)^{-1} L`` this is ``Gamma(x) Gamma(x)^T`` with
``Gamma(x) = grad_k(x)^T F``, which keeps every candidate matrix PSD by
construction and lets the dense and low-rank paths share one contraction.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, NumericalError
from .kernels import KernelSpec, as_2d, gram, kernel_gradient_stack, median_heuristic
from .linalg import (
    LowRankFactor,
    kernel_incomplete_cholesky,
    orthonormalize,
    psd_factor,
    regularized_solve,
    sym_eig,
    woodbury_apply,
)

METHODS = ("gkdr", "gkdr_i", "gkdr_v")
RANK_TOL = 1e-8


@dataclass(frozen=True)
class LowRankConfig:
    tol: float = 1e-6
    max_rank: int | None = None


@dataclass(frozen=True)
class GkdrConfig:
    """Settings shared by the three estimators.

    ``i_schedule`` is only read by :func:`fit_gkdr_i` and ``v_partition`` only by
    :func:`fit_gkdr_v`; ``None`` selects the defaults described there.
    """

    d: int
    spec: KernelSpec
    low_rank: LowRankConfig | None = None
    i_schedule: tuple | None = None
    v_partition: int | None = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"d must be a positive integer, got {self.d!r}")
        if self.i_schedule is not None:
            sched = tuple(int(s) for s in self.i_schedule)
            if not sched or sched[-1] != self.d:
                raise ConfigError(f"schedule {sched} must end at d={self.d}")
            if any(a <= b for a, b in zip(sched, sched[1:])):
                raise ConfigError(f"schedule {sched} must be strictly decreasing")
            object.__setattr__(self, "i_schedule", sched)
        if self.v_partition is not None and self.v_partition < 1:
            raise ConfigError("v_partition must be at least 1")


@dataclass(frozen=True)
class Projection:
    B: np.ndarray
    eigenvalues: np.ndarray
    method: str
    spec: KernelSpec
    details: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.B.shape[1]


def _check_xy(X, Y):
    X = as_2d(X)
    Y = as_2d(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise ConfigError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ConfigError("X and Y must be finite")
    return X, Y


def _gamma(X, apply_gx, F, sigma):
    """Contract the gradient stacks at every sample point with ``F``.

    Returns ``Gamma`` of shape (n, m, r) with
    ``Gamma[i, a, t] = sum_j (X_j^a - X_i^a) G_X[i, j] F[j, t] / sigma^2``,
    i.e. ``grad_k(X_i)^T F``.  ``apply_gx(V)`` must return ``G_X @ V``.
    """
    n, m = X.shape
    r = F.shape[1]
    XF = (X[:, :, None] * F[:, None, :]).reshape(n, m * r)
    first = apply_gx(XF).reshape(n, m, r)
    second = X[:, :, None] * apply_gx(F)[:, None, :]
    return (first - second) / sigma**2


def candidate_matrix_at(X, G_X, G_Y, spec, x):
    """Candidate matrix ``M(x)`` at an arbitrary query point (m x m, PSD)."""
    X = as_2d(X)
    n = X.shape[0]
    grad = kernel_gradient_stack(X, x, spec.sigma_x)
    F = regularized_solve(G_X, n * spec.epsilon, psd_factor(G_Y))
    gamma = grad.T @ F
    return gamma @ gamma.T


def pointwise_candidates(X, G_X, G_Y, spec):
    """All candidate matrices ``M(X_i)`` stacked as an (n, m, m) array."""
    X = as_2d(X)
    n = X.shape[0]
    F = regularized_solve(G_X, n * spec.epsilon, psd_factor(G_Y))
    gamma = _gamma(X, lambda V: G_X @ V, F, spec.sigma_x)
    return np.einsum("iat,ibt->iab", gamma, gamma)


def average_candidate(X, G_X, G_Y, spec):
    """Averaged candidate matrix ``(1/n) sum_i M(X_i)``."""
    X = as_2d(X)
    n = X.shape[0]
    F = regularized_solve(G_X, n * spec.epsilon, psd_factor(G_Y))
    gamma = _gamma(X, lambda V: G_X @ V, F, spec.sigma_x)
    M = np.einsum("iat,ibt->ab", gamma, gamma) / n
    return 0.5 * (M + M.T)


def average_candidate_lowrank(X, R, H, spec):
    """Averaged candidate matrix from factors ``G_X ~= R R^T`` and ``G_Y ~= H H^T``.

    Memory is ``O(n m r)``: no n x n array is formed.  The Gram matrix inside
    the gradient stacks is replaced by ``R R^T`` as well.
    """
    X = as_2d(X)
    R = R.R if isinstance(R, LowRankFactor) else np.asarray(R, dtype=float)
    H = H.R if isinstance(H, LowRankFactor) else np.asarray(H, dtype=float)
    n = X.shape[0]
    F = woodbury_apply(R, n * spec.epsilon, H)
    gamma = _gamma(X, lambda V: R @ (R.T @ V), F, spec.sigma_x)
    M = np.einsum("iat,ibt->ab", gamma, gamma) / n
    return 0.5 * (M + M.T)


def _averaged_matrix(X, Y, config):
    spec = config.spec
    if config.low_rank is not None:
        lr = config.low_rank
        R = kernel_incomplete_cholesky(X, spec.sigma_x, lr.tol, lr.max_rank)
        H = kernel_incomplete_cholesky(Y, spec.sigma_y, lr.tol, lr.max_rank)
        return average_candidate_lowrank(X, R, H, spec), {"rank_x": R.rank, "rank_y": H.rank}
    G_X = gram(X, spec.sigma_x)
    G_Y = gram(Y, spec.sigma_y)
    return average_candidate(X, G_X, G_Y, spec), {}


def _validate_fit(X, Y, d):
    X, Y = _check_xy(X, Y)
    n, m = X.shape
    if n < 2:
        raise ConfigError("at least two samples are required")
    if not 1 <= d < m:
        raise ConfigError(f"target dimension d={d} must satisfy 1 <= d < m={m}")
    if np.all(X == X[0]):
        raise ConfigError("all input points are identical")
    return X, Y


def fit_gkdr(X, Y, config):
    """Top-``d`` eigenvectors of the averaged candidate matrix."""
    X, Y = _validate_fit(X, Y, config.d)
    M, info = _averaged_matrix(X, Y, config)
    if not np.all(np.isfinite(M)):
        raise NumericalError("candidate matrix has non-finite entries")
    eig = sym_eig(M)
    B = eig.eigenvectors[:, :config.d]
    vals = np.maximum(eig.eigenvalues[:config.d], 0.0)
    return Projection(B, vals, "gkdr", config.spec, info)


def default_schedule(m, d, stages=5):
    """Geometric interpolation from ``m`` down to ``d`` over ``stages`` steps.

    >>> default_schedule(10, 1)
    (6, 4, 3, 2, 1)
    """
    steps = [int(round(m * (d / m) ** (s / stages))) for s in range(1, stages + 1)]
    sched = []
    for s in steps:
        s = min(max(s, d), m - 1)
        if not sched or s < sched[-1]:
            sched.append(s)
    if sched[-1] != d:
        sched.append(d)
    return tuple(sched)


def fit_gkdr_i(X, Y, config):
    """Iterative gKDR: shrink the dimension through a decreasing schedule.

    Stage ``s`` fits gKDR to the data projected by the previous stages.  The
    input bandwidth is re-derived at every stage as ``c * median(Z)``, where
    ``c = sigma_x / median(X)`` is the multiplier implied by ``config.spec``.
    The composed ``m x d`` matrix ``B_1 B_2 ... B_l`` is re-orthonormalized.
    """
    X, Y = _validate_fit(X, Y, config.d)
    m = X.shape[1]
    schedule = config.i_schedule or default_schedule(m, config.d)
    if schedule[0] >= m:
        raise ConfigError(f"schedule {schedule} must start below m={m}")
    multiplier = config.spec.sigma_x / median_heuristic(X)

    Z = X
    B_total = np.eye(m)
    proj = None
    for stage, dim in enumerate(schedule):
        spec = config.spec if stage == 0 else replace(
            config.spec, sigma_x=multiplier * median_heuristic(Z))
        proj = fit_gkdr(Z, Y, replace(config, d=dim, spec=spec, i_schedule=None))
        B_total = B_total @ proj.B
        Z = X @ B_total
    B = orthonormalize(B_total)
    return Projection(B, proj.eigenvalues, "gkdr_i", config.spec,
                      {"schedule": list(schedule), "multiplier": multiplier})


def default_block_size(n, m):
    return 1 if n * m * m <= 10**7 else 100


def fit_gkdr_v(X, Y, config):
    """Projector-averaging gKDR.

    Indices are cut into consecutive blocks of ``v_partition`` points.  Each
    block contributes the projector onto the leading eigenvectors of its summed
    candidate matrices, keeping at most as many as the block's numerical rank.
    The estimate is the top-``d`` eigenspace of the mean projector.
    """
    X, Y = _validate_fit(X, Y, config.d)
    if config.low_rank is not None:
        raise ConfigError("gkdr_v does not support the low-rank path")
    n, m = X.shape
    d = config.d
    block = config.v_partition or default_block_size(n, m)
    spec = config.spec
    G_X = gram(X, spec.sigma_x)
    G_Y = gram(Y, spec.sigma_y)
    Ms = pointwise_candidates(X, G_X, G_Y, spec)

    P = np.zeros((m, m))
    n_blocks = 0
    for start in range(0, n, block):
        M_block = Ms[start:start + block].sum(axis=0)
        w, V = np.linalg.eigh(0.5 * (M_block + M_block.T))
        w, V = w[::-1], V[:, ::-1]
        rank = int(np.sum(w > RANK_TOL * w[0])) if w[0] > 0 else 0
        k = min(d, rank)
        P += V[:, :k] @ V[:, :k].T
        n_blocks += 1
    P /= n_blocks
    eig = sym_eig(0.5 * (P + P.T))
    return Projection(eig.eigenvectors[:, :d], np.clip(eig.eigenvalues[:d], 0.0, 1.0),
                      "gkdr_v", spec, {"block_size": block, "n_blocks": n_blocks})


def fit(X, Y, method, config):
    """Dispatch on ``method`` (``gkdr``, ``gkdr_i`` or ``gkdr_v``; dashes accepted)."""
    method = normalize_method(method)
    return {"gkdr": fit_gkdr, "gkdr_i": fit_gkdr_i, "gkdr_v": fit_gkdr_v}[method](X, Y, config)


def normalize_method(method):
    key = str(method).lower().replace("-", "_")
    if key not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from gkdr, gkdr-i, gkdr-v")
    return key


def project(projection, X):
    """Coordinates of the rows of ``X`` in the estimated subspace (``X @ B``)."""
    B = projection.B if isinstance(projection, Projection) else np.asarray(projection, dtype=float)
    X = as_2d(X)
    if X.shape[1] != B.shape[0]:
        raise ConfigError(f"X has {X.shape[1]} columns but the projection expects {B.shape[0]}")
    return X @ B
