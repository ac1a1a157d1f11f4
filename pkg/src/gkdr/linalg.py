"""Dense symmetric eigensolver, regularized solves and pivoted incomplete Cholesky."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import ConfigError, NumericalError


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]


@dataclass(frozen=True)
class LowRankFactor:
    """``G ~= R @ R.T`` with ``R`` of shape (n, rank)."""

    R: np.ndarray
    pivots: np.ndarray
    residual_bound: float

    @property
    def rank(self):
        return self.R.shape[1]


def _require_finite(A, name):
    if not np.all(np.isfinite(A)):
        raise NumericalError(f"{name} contains non-finite entries")


def fix_signs(V):
    """Flip columns so the entry of largest magnitude is positive (first one on ties)."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eig(A):
    """Eigendecomposition of a symmetric matrix, eigenvalues in descending order.

    Eigenvector signs are normalized with :func:`fix_signs` so that identical
    input always gives identical output.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ConfigError(f"expected a non-empty square matrix, got shape {A.shape}")
    _require_finite(A, "matrix")
    scale = np.max(np.abs(A))
    if np.max(np.abs(A - A.T)) > 1e-10 * scale:
        raise ConfigError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    order = np.argsort(-w, kind="stable")
    return EigenResult(w[order], fix_signs(V[:, order]))


def top_eigenvectors(A, d):
    """Leading ``d`` eigenpairs of a symmetric matrix."""
    res = sym_eig(A)
    return res.eigenvectors[:, :d], res.eigenvalues[:d]


def regularized_solve(G, c, B):
    """Solve ``(G + c I) S = B`` by Cholesky factorization; ``G`` must be PSD."""
    if not c > 0:
        raise ConfigError(f"regularization must be positive, got {c!r}")
    G = np.asarray(G, dtype=float)
    B = np.asarray(B, dtype=float)
    _require_finite(G, "G")
    _require_finite(B, "right-hand side")
    A = G + c * np.eye(G.shape[0])
    try:
        factor = sla.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorization of G + cI failed (c={c:g}): {exc}") from exc
    return sla.cho_solve(factor, B, check_finite=False)


def _pivoted_cholesky(diag, column, n, tol, max_rank):
    if tol < 0:
        raise ConfigError("tol must be non-negative")
    if max_rank is None:
        max_rank = n
    if not 1 <= max_rank <= n:
        raise ConfigError(f"max_rank must lie in [1, {n}], got {max_rank}")

    d = np.array(diag, dtype=float, copy=True)
    if np.any(d < 0):
        raise NumericalError("negative diagonal entry: matrix is not PSD")
    trace = d.sum()
    # pivots at this level are indistinguishable from rounding noise
    roundoff = n * np.finfo(float).eps * max(d.max(), 0.0)
    R = np.zeros((n, max_rank))
    pivots = []
    for k in range(max_rank):
        if d.sum() <= tol * trace:
            break
        j = int(np.argmax(d))
        if d[j] <= roundoff:
            break
        col = column(j) - R[:, :k] @ R[j, :k]
        R[:, k] = col / np.sqrt(d[j])
        d -= R[:, k] ** 2
        d[j] = 0.0
        if d.min() < -1e-8 * trace:
            raise NumericalError("negative residual pivot: matrix is not PSD")
        np.maximum(d, 0.0, out=d)
        pivots.append(j)
    r = len(pivots)
    return LowRankFactor(R[:, :r].copy(), np.array(pivots, dtype=int), float(d.sum()))


def incomplete_cholesky(G, tol=1e-6, max_rank=None):
    """Greedy pivoted Cholesky ``G ~= R R^T`` of a PSD matrix.

    Stops once the trace of the residual ``G - R R^T`` is at most
    ``tol * trace(G)`` or the rank reaches ``max_rank`` (default ``n``).
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] == 0:
        raise ConfigError(f"expected a non-empty square matrix, got shape {G.shape}")
    _require_finite(G, "G")
    return _pivoted_cholesky(np.diag(G), lambda j: G[:, j], G.shape[0], tol, max_rank)


def kernel_incomplete_cholesky(X, sigma, tol=1e-6, max_rank=None):
    """Incomplete Cholesky of the Gaussian Gram matrix of ``X``, built column by column.

    Only ``O(n * rank)`` memory is used; the Gram matrix itself is never formed.
    """
    from .kernels import as_2d, cross_gram

    X = as_2d(X)
    n = X.shape[0]
    return _pivoted_cholesky(np.ones(n), lambda j: cross_gram(X, X[j:j + 1], sigma)[:, 0],
                             n, tol, max_rank)


def woodbury_apply(R, c, B):
    """Apply ``(R R^T + c I)^{-1}`` to ``B`` through the ``r x r`` inner system."""
    if isinstance(R, LowRankFactor):
        R = R.R
    if not c > 0:
        raise ConfigError(f"regularization must be positive, got {c!r}")
    R = np.asarray(R, dtype=float)
    B = np.asarray(B, dtype=float)
    if R.shape[1] == 0:
        return B / c
    inner = c * np.eye(R.shape[1]) + R.T @ R
    try:
        factor = sla.cho_factor(inner, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("inner Woodbury system is not positive definite; "
                             "loosen the factorization tolerance") from exc
    return (B - R @ sla.cho_solve(factor, R.T @ B, check_finite=False)) / c


def psd_factor(G):
    """Return ``L`` with ``G ~= L L^T`` from an eigendecomposition, dropping null directions."""
    w, V = np.linalg.eigh(0.5 * (G + G.T))
    keep = w > max(w.max(), 0.0) * G.shape[0] * np.finfo(float).eps
    return V[:, keep] * np.sqrt(w[keep])


def orthonormalize(B):
    """Orthonormal basis of the column span of ``B`` (same column count), signs fixed."""
    Q, _ = np.linalg.qr(B)
    return fix_signs(Q)
