"""Kernel-parameter selection by K-fold cross-validation of a kNN predictor on projected data."""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .data import make_rng
from .errors import ConfigError
from .estimators import GkdrConfig, fit, normalize_method, project
from .kernels import KernelSpec, as_2d, median_heuristic, output_median


def default_multipliers():
    return tuple(float(c) for c in np.geomspace(0.5, 10.0, 8))


@dataclass(frozen=True)
class CVConfig:
    k_neighbors: int = 5
    folds: int = 5
    multipliers: tuple = field(default_factory=default_multipliers)
    epsilons: tuple = (1e-7,)
    task: str = "regression"
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ConfigError("k_neighbors must be at least 1")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if not self.multipliers or any(not c > 0 for c in self.multipliers):
            raise ConfigError("multipliers must be a non-empty list of positive numbers")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            raise ConfigError("epsilons must be a non-empty list of positive numbers")
        if self.task not in ("regression", "classification"):
            raise ConfigError(f"unknown task {self.task!r}")


@dataclass(frozen=True)
class CVRow:
    multiplier: float
    epsilon: float
    mean_error: float
    fold_errors: tuple


@dataclass(frozen=True)
class CVReport:
    table: tuple
    selected: tuple  # (multiplier, epsilon)
    sigma_med_x: float
    sigma_med_y: float

    @property
    def spec(self):
        """Kernel parameters of the selected grid point."""
        c, eps = self.selected
        return KernelSpec(c * self.sigma_med_x, c * self.sigma_med_y, eps)

    def to_dict(self):
        return {
            "table": [{"multiplier": r.multiplier, "epsilon": r.epsilon,
                       "mean_error": r.mean_error, "fold_errors": list(r.fold_errors)}
                      for r in self.table],
            "selected": {"multiplier": self.selected[0], "epsilon": self.selected[1]},
            "sigma_med_x": self.sigma_med_x,
            "sigma_med_y": self.sigma_med_y,
        }


def _labels(Y):
    Y = np.asarray(Y)
    if Y.ndim == 2 and Y.shape[1] > 1:
        return np.argmax(Y, axis=1)
    return Y.reshape(-1).astype(int)


def knn_predict(train_Z, train_Y, query_Z, k, task="regression"):
    """k-nearest-neighbour prediction in Euclidean distance.

    Distance ties go to the smaller training index.  Regression averages the
    neighbours' responses; classification takes the majority class index (ties
    to the smaller index), accepting either integer labels or one-hot rows.
    """
    train_Z, query_Z = as_2d(train_Z, "train_Z"), as_2d(query_Z, "query_Z")
    n = train_Z.shape[0]
    if n == 0:
        raise ConfigError("empty training set")
    if not 1 <= k <= n:
        raise ConfigError(f"k={k} must lie in [1, {n}]")
    if train_Z.shape[1] != query_Z.shape[1]:
        raise ConfigError("training and query points have different dimensions")
    dist = cdist(query_Z, train_Z, "sqeuclidean")
    nbrs = np.argsort(dist, axis=1, kind="stable")[:, :k]
    if task == "regression":
        Y = as_2d(train_Y, "train_Y")
        pred = Y[nbrs].mean(axis=1)
        return pred[:, 0] if np.ndim(train_Y) == 1 else pred
    if task == "classification":
        labels = _labels(train_Y)
        n_classes = labels.max() + 1
        votes = np.zeros((query_Z.shape[0], n_classes), dtype=int)
        np.add.at(votes, (np.arange(query_Z.shape[0])[:, None], labels[nbrs]), 1)
        return np.argmax(votes, axis=1)
    raise ConfigError(f"unknown task {task!r}")


def prediction_error(pred, truth, task):
    if task == "classification":
        return float(np.mean(np.asarray(pred) != _labels(truth)))
    diff = as_2d(pred) - as_2d(truth)
    return float(np.mean(np.sum(diff**2, axis=1)))


def fold_assignment(n, folds, seed, classes=None):
    """Fold index per sample: seeded shuffle then contiguous split.

    With ``classes`` the shuffled order is grouped by class and dealt out
    round-robin, so every fold receives a near-equal share of each class.
    """
    if n < folds:
        raise ConfigError(f"cannot make {folds} folds from {n} samples")
    perm = make_rng(seed).permutation(n)
    assign = np.empty(n, dtype=int)
    if classes is None:
        for f, idx in enumerate(np.array_split(perm, folds)):
            assign[idx] = f
    else:
        order = perm[np.argsort(np.asarray(classes)[perm], kind="stable")]
        assign[order] = np.arange(n) % folds
    return assign


def cross_validate(X, Y, d, cv, method="gkdr", **fit_options):
    """Score each (multiplier, epsilon) grid point and select the best.

    The bandwidths are ``c * median(X)`` and ``c * median(Y)`` for the
    multiplier ``c``.  ``fit_options`` are forwarded to :class:`GkdrConfig`
    (``low_rank``, ``i_schedule``, ``v_partition``).
    """
    method = normalize_method(method)
    X, Y = as_2d(X), as_2d(Y, "Y")
    n = X.shape[0]
    med_x, med_y = median_heuristic(X), output_median(Y)
    classes = _labels(Y) if cv.task == "classification" else None
    folds = fold_assignment(n, cv.folds, cv.seed, classes)
    for f in range(cv.folds):
        if np.sum(folds != f) < cv.k_neighbors:
            raise ConfigError(f"fold {f} leaves fewer than k={cv.k_neighbors} training points")

    rows = []
    for c in cv.multipliers:
        for eps in cv.epsilons:
            spec = KernelSpec(c * med_x, c * med_y, eps)
            config = GkdrConfig(d=d, spec=spec, **fit_options)
            errors = []
            for f in range(cv.folds):
                train, test = folds != f, folds == f
                proj = fit(X[train], Y[train], method, config)
                pred = knn_predict(project(proj, X[train]), Y[train], project(proj, X[test]),
                                   cv.k_neighbors, cv.task)
                errors.append(prediction_error(pred, Y[test], cv.task))
            rows.append(CVRow(float(c), float(eps), float(np.mean(errors)), tuple(errors)))
    best = min(rows, key=lambda r: (r.mean_error, r.multiplier, r.epsilon))
    return CVReport(tuple(rows), (best.multiplier, best.epsilon), med_x, med_y)
