import numpy as np
import pytest
from numpy.testing import assert_array_equal

from gkdr.data import gen_synth_A, one_hot
from gkdr.errors import ConfigError
from gkdr.model_selection import (
    CVConfig,
    cross_validate,
    default_multipliers,
    fold_assignment,
    knn_predict,
    prediction_error,
)


def brute_force_knn(train, y, q, k):
    """Neighbours by explicit sort of (distance, index) pairs."""
    out = []
    for x in q:
        pairs = sorted((abs(t - x), j) for j, t in enumerate(train))
        out.append(np.mean([y[j] for _, j in pairs[:k]]))
    return np.array(out)


class TestKnn:
    def test_full_neighbourhood_is_global_mean(self):
        rng = np.random.default_rng(0)
        Z, y = rng.normal(size=(9, 2)), rng.normal(size=9)
        pred = knn_predict(Z, y, rng.normal(size=(4, 2)), 9)
        assert np.allclose(pred, y.mean(), rtol=1e-14)

    def test_nearest_point_label(self):
        pred = knn_predict([[0.0], [10.0]], np.array([0, 1]), [[1.0]], 1, "classification")
        assert pred.tolist() == [0]

    def test_one_hot_labels_accepted(self):
        Y, _ = one_hot(["a", "b"])
        assert knn_predict([[0.0], [10.0]], Y, [[9.0]], 1, "classification").tolist() == [1]

    def test_brute_force_five_points(self):
        train = [0.0, 1.0, 3.0, 4.5, 7.0]
        y = [1.0, -2.0, 0.5, 4.0, 8.0]
        q = [-1.0, 2.0, 2.9, 5.5, 10.0]
        for k in range(1, 6):
            pred = knn_predict(np.array(train)[:, None], np.array(y), np.array(q)[:, None], k)
            assert np.allclose(pred, brute_force_knn(train, y, q, k), rtol=1e-14)

    def test_distance_tie_goes_to_smaller_index(self):
        # query 1 is equidistant from 0 and 2
        assert knn_predict([[2.0], [0.0]], np.array([5.0, 7.0]), [[1.0]], 1).tolist() == [5.0]
        assert knn_predict([[0.0], [2.0]], np.array([5.0, 7.0]), [[1.0]], 1).tolist() == [5.0]

    def test_vote_tie_goes_to_smaller_label(self):
        pred = knn_predict([[0.0], [1.0]], np.array([1, 0]), [[0.4]], 2, "classification")
        assert pred.tolist() == [0]

    def test_k1_on_training_points_is_exact(self):
        rng = np.random.default_rng(1)
        Z, y = rng.normal(size=(20, 3)), rng.normal(size=20)
        assert_array_equal(knn_predict(Z, y, Z, 1), y)
        labels = rng.integers(0, 4, size=20)
        assert_array_equal(knn_predict(Z, labels, Z, 1, "classification"), labels)

    def test_errors(self):
        with pytest.raises(ConfigError):
            knn_predict(np.empty((0, 1)), np.empty(0), [[0.0]], 1)
        with pytest.raises(ConfigError):
            knn_predict([[0.0], [1.0]], np.array([0.0, 1.0]), [[0.0]], 3)
        with pytest.raises(ConfigError):
            knn_predict([[0.0], [1.0]], np.array([0.0, 1.0]), [[0.0, 1.0]], 1)


class TestPredictionError:
    def test_regression(self):
        assert prediction_error(np.array([1.0, 2.0]), np.array([0.0, 4.0]), "regression") == 2.5

    def test_classification(self):
        Y, _ = one_hot(["a", "b", "a", "b"])
        assert prediction_error(np.array([0, 1, 1, 1]), Y, "classification") == 0.25


class TestFolds:
    def test_balanced_and_deterministic(self):
        a = fold_assignment(23, 5, seed=3)
        assert_array_equal(a, fold_assignment(23, 5, seed=3))
        assert sorted(np.bincount(a).tolist()) == [4, 4, 5, 5, 5]

    def test_stratified(self):
        classes = np.array([0] * 10 + [1] * 5)
        a = fold_assignment(15, 5, seed=0, classes=classes)
        for f in range(5):
            assert np.sum(a[classes == 0] == f) == 2
            assert np.sum(a[classes == 1] == f) == 1

    def test_too_few_samples(self):
        with pytest.raises(ConfigError):
            fold_assignment(3, 5, seed=0)


class TestCVConfig:
    def test_default_grid(self):
        grid = default_multipliers()
        assert len(grid) == 8
        assert grid[0] == pytest.approx(0.5) and grid[-1] == pytest.approx(10.0)
        assert np.allclose(np.diff(np.log(grid)), np.log(20) / 7)
        assert CVConfig().k_neighbors == 5 and CVConfig().folds == 5

    @pytest.mark.parametrize("kwargs", [dict(k_neighbors=0), dict(folds=1), dict(multipliers=()),
                                        dict(multipliers=(1.0, -1.0)), dict(epsilons=(0.0,)),
                                        dict(task="ranking")])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            CVConfig(**kwargs)


@pytest.fixture(scope="module")
def data():
    ds = gen_synth_A(60, seed=4)
    return ds.X, ds.Y


class TestCrossValidate:
    def test_singleton_grid(self, data):
        rep = cross_validate(*data, 1, CVConfig(multipliers=(1.7,)))
        assert rep.selected == (1.7, 1e-7)
        assert len(rep.table) == 1

    def test_selects_minimum(self, data):
        rep = cross_validate(*data, 1, CVConfig(multipliers=(0.5, 2.0, 6.0)))
        best = min(rep.table, key=lambda r: r.mean_error)
        assert rep.selected[0] == best.multiplier
        for r in rep.table:
            assert r.mean_error == pytest.approx(np.mean(r.fold_errors), rel=1e-15)
            assert len(r.fold_errors) == 5 and r.mean_error >= 0

    def test_spec_uses_median_bandwidths(self, data):
        rep = cross_validate(*data, 1, CVConfig(multipliers=(2.0,)))
        assert rep.spec.sigma_x == 2.0 * rep.sigma_med_x
        assert rep.spec.sigma_y == 2.0 * rep.sigma_med_y

    def test_deterministic(self, data):
        cv = CVConfig(multipliers=(1.0, 3.0), seed=11)
        assert cross_validate(*data, 1, cv) == cross_validate(*data, 1, cv)

    def test_grid_permutation_invariance(self, data):
        a = cross_validate(*data, 1, CVConfig(multipliers=(0.5, 2.0, 6.0), epsilons=(1e-7, 1e-4)))
        b = cross_validate(*data, 1, CVConfig(multipliers=(6.0, 0.5, 2.0), epsilons=(1e-4, 1e-7)))
        assert a.selected == b.selected

    def test_tie_goes_to_smaller_multiplier(self):
        # widely separated classes: every grid point classifies perfectly
        rng = np.random.default_rng(2)
        labels = np.repeat([0, 1], 20)
        X = rng.normal(size=(40, 3))
        X[:, 1] += 20 * labels
        Y = np.eye(2)[labels]
        cv = CVConfig(multipliers=(4.0, 1.0, 2.0), epsilons=(1e-3, 1e-7), task="classification")
        rep = cross_validate(X, Y, 1, cv)
        assert all(r.mean_error == 0.0 for r in rep.table)
        assert rep.selected == (1.0, 1e-7)

    def test_classification_error_range(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 4))
        labels = np.r_[np.zeros(40), np.ones(10)]
        X[:, 0] += 3 * labels
        Y = np.eye(2)[labels.astype(int)]  # 80/20 split: plain one-hot median is zero
        rep = cross_validate(X, Y, 1, CVConfig(multipliers=(1.0, 4.0), task="classification"))
        for r in rep.table:
            assert all(0.0 <= e <= 1.0 for e in r.fold_errors)
        assert min(r.mean_error for r in rep.table) <= 0.2

    def test_fold_smaller_than_k(self):
        ds = gen_synth_A(6, seed=0)
        with pytest.raises(ConfigError):
            cross_validate(ds.X, ds.Y, 1, CVConfig(folds=2, k_neighbors=5))

    def test_too_few_samples_for_folds(self):
        ds = gen_synth_A(4, seed=0)
        with pytest.raises(ConfigError):
            cross_validate(ds.X, ds.Y, 1, CVConfig(k_neighbors=1))

    def test_other_methods(self, data):
        for method in ("gkdr-i", "gkdr_v"):
            rep = cross_validate(*data, 1, CVConfig(multipliers=(2.0,)), method)
            assert np.isfinite(rep.table[0].mean_error)
