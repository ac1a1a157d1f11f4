"""Gaussian kernel, Gram matrices, analytic kernel gradients and the median heuristic."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .errors import ConfigError


@dataclass(frozen=True)
class KernelSpec:
    """Bandwidths of the input/output Gaussian kernels and the regularization."""

    sigma_x: float
    sigma_y: float
    epsilon: float = 1e-7

    def __post_init__(self):
        for name in ("sigma_x", "sigma_y", "epsilon"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
        _check_sigma(self.sigma_x)
        _check_sigma(self.sigma_y)

    def to_dict(self):
        return {"sigma_x": float(self.sigma_x), "sigma_y": float(self.sigma_y),
                "epsilon": float(self.epsilon)}


# bandwidths whose square over- or underflows cannot be used
SIGMA_RANGE = (1e-150, 1e150)


def _check_sigma(sigma):
    if not (np.isfinite(sigma) and sigma > 0):
        raise ConfigError(f"bandwidth must be positive, got {sigma!r}")
    if not SIGMA_RANGE[0] <= sigma <= SIGMA_RANGE[1]:
        raise ConfigError(f"bandwidth {sigma!r} is outside {SIGMA_RANGE}; rescale the data")


def as_2d(X, name="X"):
    """Return ``X`` as a float 2-D array; 1-D input is read as a single column."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ConfigError(f"{name} must be a 2-D array, got shape {X.shape}")
    return X


def gaussian_kernel(x, y, sigma):
    """exp(-||x - y||^2 / (2 sigma^2)) for two vectors."""
    _check_sigma(sigma)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape:
        raise ConfigError(f"dimension mismatch: {x.shape} vs {y.shape}")
    diff = x - y
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma**2)))


def gram(X, sigma):
    """Gaussian Gram matrix ``G[i, j] = k(X_i, X_j)``.

    Squared distances are summed coordinate-wise rather than expanded as
    ``|x|^2 + |y|^2 - 2 x.y``, so the result is exactly symmetric with an
    exactly unit diagonal.
    """
    _check_sigma(sigma)
    X = as_2d(X)
    if X.shape[0] == 0:
        raise ConfigError("cannot build a Gram matrix from an empty sample")
    if X.shape[0] == 1:
        return np.ones((1, 1))
    sq = squareform(pdist(X, "sqeuclidean"))
    return np.exp(-np.maximum(sq, 0.0) / (2.0 * sigma**2))


def cross_gram(X, Z, sigma):
    """Rectangular Gaussian kernel matrix between the rows of ``X`` and ``Z``."""
    _check_sigma(sigma)
    X, Z = as_2d(X), as_2d(Z, "Z")
    if X.shape[1] != Z.shape[1]:
        raise ConfigError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    return np.exp(-np.maximum(cdist(X, Z, "sqeuclidean"), 0.0) / (2.0 * sigma**2))


def kernel_gradient_stack(X, x, sigma):
    """Gradients of ``k(X_j, .)`` at the query point ``x``, one row per sample.

    Parameters
    ----------
    X : (n, m) array
    x : (m,) array
    sigma : float

    Returns
    -------
    (n, m) array whose row ``j`` is ``(X_j - x) k(X_j, x) / sigma^2``.
    """
    _check_sigma(sigma)
    X = as_2d(X)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != X.shape[1]:
        raise ConfigError(f"query point of shape {x.shape} does not match X with {X.shape[1]} columns")
    diff = X - x
    k = np.exp(-np.sum(diff * diff, axis=1) / (2.0 * sigma**2))
    return diff * (k / sigma**2)[:, None]


def median_heuristic(X, nonzero_fallback=False):
    """Median of the pairwise Euclidean distances between the rows of ``X``.

    Parameters
    ----------
    X : array_like, shape (n, m)
    nonzero_fallback : bool
        When more than half of the pairs coincide (one-hot labels with a
        dominant class, say) the median is zero.  With this flag the median of
        the nonzero distances is used instead, which is sqrt(2) for one-hot
        rows.  Without it a zero median is an error.
    """
    X = as_2d(X)
    if X.shape[0] < 2:
        raise ConfigError("the median heuristic needs at least two points")
    dist = pdist(X, "euclidean")
    med = float(np.median(dist))
    if not med > 0 and nonzero_fallback and np.any(dist > 0):
        med = float(np.median(dist[dist > 0]))
    if not med > 0:
        raise ConfigError("median pairwise distance is zero; supply the bandwidth explicitly")
    return med


def output_median(Y):
    """Median heuristic for the response, tolerant of repeated rows (class labels)."""
    return median_heuristic(Y, nonzero_fallback=True)
