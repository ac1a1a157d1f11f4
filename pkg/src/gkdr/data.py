"""Synthetic benchmark generators, CSV ingestion and train/test splitting.

All randomness goes through :func:`make_rng`, a NumPy ``Generator`` on the
counter-based Philox bit generator, so a given integer seed produces the
same stream on every platform.
"""

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, EmptyFileError, MissingColumnError, ParseError

NOISE_SD = 0.1  # noise variance 1e-2


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master, index):
    """Independent 63-bit seed for item ``index`` of a run seeded with ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    task: str = "regression"
    labels: list | None = None
    B0: np.ndarray | None = None
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.Y.ndim == 1:
            self.Y = self.Y[:, None]
        if self.task not in ("regression", "classification"):
            raise ConfigError(f"unknown task {self.task!r}")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def m(self):
        return self.X.shape[1]

    def class_indices(self):
        """Integer class index per row (classification only)."""
        if self.task != "classification":
            raise ConfigError("class indices are only defined for classification data")
        return np.argmax(self.Y, axis=1)

    def subset(self, idx):
        return replace(self, X=self.X[idx], Y=self.Y[idx])


def _uniform_inputs(rng, n, m):
    return 2.0 * rng.random((n, m)) - 1.0


def synth_a_response(X, noise=None):
    z = (X[:, 0] + 2.0 * X[:, 1]) / np.sqrt(5.0)
    y = z * np.sin(np.sqrt(5.0) * z)
    return y if noise is None else y + noise


def synth_b_response(X, noise=None):
    z1 = (X[:, 0] + X[:, 1]) / np.sqrt(2.0)
    z2 = (X[:, 0] - X[:, 1]) / np.sqrt(2.0)
    y = (z1**3 + z2) * (z1 - z2**3)
    return y if noise is None else y + noise


def _check_n(n):
    if int(n) != n or n < 1:
        raise ConfigError(f"sample size must be a positive integer, got {n!r}")


def gen_synth_A(n, seed=0, m=10):
    """Y = Z sin(sqrt(5) Z) + W with Z = (X_1 + 2 X_2)/sqrt(5), X ~ U[-1, 1]^10."""
    _check_n(n)
    rng = make_rng(seed)
    X = _uniform_inputs(rng, n, m)
    W = NOISE_SD * rng.standard_normal(n)
    B0 = np.zeros((m, 1))
    B0[:2, 0] = np.array([1.0, 2.0]) / np.sqrt(5.0)
    return Dataset(X, synth_a_response(X, W), B0=B0)


def gen_synth_B(n, seed=0, m=10):
    """Y = (Z1^3 + Z2)(Z1 - Z2^3) + W on the (1,1)/sqrt2, (1,-1)/sqrt2 directions."""
    _check_n(n)
    rng = make_rng(seed)
    X = _uniform_inputs(rng, n, m)
    W = NOISE_SD * rng.standard_normal(n)
    B0 = np.zeros((m, 2))
    B0[:2, 0] = np.array([1.0, 1.0]) / np.sqrt(2.0)
    B0[:2, 1] = np.array([1.0, -1.0]) / np.sqrt(2.0)
    return Dataset(X, synth_b_response(X, W), B0=B0)


def gen_symmetric_quadratic(n, seed=0, m=10):
    """Y = (b^T X)^2 + W with X uniform on the symmetric cube and b = (1,1,0,...)/sqrt2.

    The regression function is even in ``b^T X``, so its average gradient is
    zero and a plain average-derivative estimate carries no directional signal.
    """
    _check_n(n)
    rng = make_rng(seed)
    X = _uniform_inputs(rng, n, m)
    W = NOISE_SD * rng.standard_normal(n)
    B0 = np.zeros((m, 1))
    B0[:2, 0] = 1.0 / np.sqrt(2.0)
    return Dataset(X, (X @ B0)[:, 0] ** 2 + W, B0=B0)


SYNTHETIC = {"A": gen_synth_A, "B": gen_synth_B, "Q": gen_symmetric_quadratic}


def one_hot(raw_labels):
    """One-hot encode labels, classes ordered by first appearance."""
    classes = list(dict.fromkeys(raw_labels))
    index = {c: i for i, c in enumerate(classes)}
    Y = np.zeros((len(raw_labels), len(classes)))
    Y[np.arange(len(raw_labels)), [index[c] for c in raw_labels]] = 1.0
    return Y, classes


def standardize(X, mean=None, scale=None):
    """Z-score the columns; constant columns are centred but left unscaled."""
    if mean is None:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
    return (X - mean) / scale, mean, scale


def load_csv(path, label_column, task="classification", standardize_x=True):
    """Read a headed, comma-separated file into a :class:`Dataset`.

    Every column except ``label_column`` is a real-valued feature.  For
    classification the label column is one-hot encoded in order of first
    appearance; for regression it is parsed as a real response.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyFileError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise MissingColumnError(f"label column {label_column!r} not found in {path}; "
                                 f"columns are {header}")
    body = rows[1:]
    if not body:
        raise EmptyFileError(f"{path} has a header but no data rows")
    li = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != li]

    X = np.empty((len(body), len(feature_names)))
    raw_labels = []
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: line {r} has {len(row)} fields, expected {len(header)}")
        raw_labels.append(row[li].strip())
        c = 0
        for i, cell in enumerate(row):
            if i == li:
                continue
            try:
                X[r - 2, c] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric value {cell!r} at line {r}, "
                                 f"column {header[i]!r}") from None
            c += 1
    if not np.all(np.isfinite(X)):
        raise ParseError(f"{path}: non-finite feature values")

    if task == "classification":
        Y, labels = one_hot(raw_labels)
    elif task == "regression":
        labels = None
        try:
            Y = np.array([float(v) for v in raw_labels])
        except ValueError:
            raise ParseError(f"{path}: non-numeric response in column {label_column!r}") from None
    else:
        raise ConfigError(f"unknown task {task!r}")
    if standardize_x:
        X = standardize(X)[0]
    return Dataset(X, Y, task=task, labels=labels, feature_names=feature_names)


def write_csv(path, X, labels, feature_names=None, label_column="label"):
    """Write features plus a label column with a header row (inverse of :func:`load_csv`)."""
    X = np.asarray(X, dtype=float)
    names = feature_names or [f"x{i + 1}" for i in range(X.shape[1])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*names, label_column])
        for row, lab in zip(X, labels):
            w.writerow([repr(float(v)) for v in row] + [lab])


def train_test_split(ds, train_fraction=None, n_train=None, seed=0, stratify=False):
    """Seeded, disjoint and exhaustive split into (train, test) datasets.

    Give either ``train_fraction`` or ``n_train``.  With ``stratify`` each class
    contributes its own rounded share of training points.
    """
    n = ds.n
    if (train_fraction is None) == (n_train is None):
        raise ConfigError("give exactly one of train_fraction and n_train")
    if n_train is None:
        n_train = int(round(train_fraction * n))
    if not 1 <= n_train < n:
        raise ConfigError(f"training size must lie in [1, {n - 1}], got {n_train}")
    rng = make_rng(seed)
    if stratify:
        classes = ds.class_indices()
        perm = rng.permutation(n)
        train = []
        frac = n_train / n
        groups = [perm[classes[perm] == c] for c in np.unique(classes)]
        quotas = [int(np.floor(frac * len(g))) for g in groups]
        # hand out the remaining slots to the largest fractional parts
        rema = sorted(range(len(groups)), key=lambda i: (-(frac * len(groups[i]) - quotas[i]), i))
        for i in rema[: n_train - sum(quotas)]:
            quotas[i] += 1
        for g, q in zip(groups, quotas):
            train.extend(g[:q].tolist())
        train = np.array(sorted(train), dtype=int)
    else:
        train = np.sort(rng.permutation(n)[:n_train])
    mask = np.zeros(n, dtype=bool)
    mask[train] = True
    return ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask))
