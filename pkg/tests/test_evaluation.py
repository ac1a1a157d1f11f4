import math

import numpy as np
import pytest
from scipy.stats import ortho_group

from gkdr.data import gen_synth_A
from gkdr.errors import ConfigError
from gkdr.evaluation import (
    classification_error,
    run_replication,
    run_synthetic_benchmark,
    subspace_error,
)
from gkdr.model_selection import CVConfig


def random_frame(rng, m, d):
    return np.linalg.qr(rng.normal(size=(m, d)))[0]


def projector_formula(B0, B):
    m = B0.shape[0]
    return np.linalg.norm(B0 @ B0.T @ (np.eye(m) - B @ B.T)) / B.shape[1]


class TestSubspaceError:
    def test_identical(self):
        B = random_frame(np.random.default_rng(0), 6, 2)
        assert subspace_error(B, B) <= 1e-15

    def test_orthogonal_axes(self):
        assert subspace_error([[1.0], [0.0]], [[0.0], [1.0]]) == 1.0

    def test_angle(self):
        t = 0.3
        assert subspace_error([[1.0], [0.0]], [[math.cos(t)], [math.sin(t)]]) == pytest.approx(
            abs(math.sin(t)), rel=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_projector_formula(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 12))
        d0, d = int(rng.integers(1, m)), int(rng.integers(1, m))
        B0, B = random_frame(rng, m, d0), random_frame(rng, m, d)
        err = subspace_error(B0, B)
        assert err == pytest.approx(projector_formula(B0, B), rel=1e-12, abs=1e-15)
        assert 0 <= err <= math.sqrt(min(d0, m - d)) / d + 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        B0, B = random_frame(rng, 8, 2), random_frame(rng, 8, 2)
        Q1, Q2 = ortho_group.rvs(2, random_state=seed), ortho_group.rvs(2, random_state=seed + 50)
        base = subspace_error(B0, B)
        assert abs(subspace_error(B0 @ Q1, B @ Q2) - base) <= 1e-12
        assert base <= 1.0

    def test_errors(self):
        with pytest.raises(ConfigError):
            subspace_error([[1.0], [1.0]], [[1.0], [0.0]])
        with pytest.raises(ConfigError):
            subspace_error([[1.0], [0.0]], [[1.0], [0.0], [0.0]])


class TestClassificationError:
    def test_counts(self):
        assert classification_error([0, 1, 2], [0, 1, 2]) == 0.0
        assert classification_error([1, 1], [0, 0]) == 1.0
        assert classification_error(["a", "b", "a", "a"], ["a", "b", "b", "a"]) == 0.25

    def test_errors(self):
        with pytest.raises(ConfigError):
            classification_error([0, 1], [0])
        with pytest.raises(ConfigError):
            classification_error([], [])


class TestBenchmark:
    def test_singleton(self):
        res = run_synthetic_benchmark("A", 40, replications=1, seed=3, multiplier=2.0)
        assert res.singleton and res.std_error == 0.0 and res.sem == 0.0
        assert res.mean_error == res.per_replication_errors[0]

    def test_statistics_and_reproducibility(self):
        cv = CVConfig(multipliers=(1.0, 4.0))
        res = run_synthetic_benchmark("A", 40, replications=4, seed=5, cv=cv)
        errs = np.array(res.per_replication_errors)
        assert res.mean_error == pytest.approx(errs.mean(), rel=1e-15)
        assert res.std_error == pytest.approx(errs.std(ddof=1), rel=1e-14)
        assert res.sem == pytest.approx(errs.std(ddof=1) / 2, rel=1e-14)
        assert set(res.selected_multipliers) <= {1.0, 4.0}
        again = run_synthetic_benchmark("A", 40, replications=4, seed=5, cv=cv)
        assert again.per_replication_errors == res.per_replication_errors

    def test_replication_is_individually_reproducible(self):
        from gkdr.data import derive_seed
        res = run_synthetic_benchmark("B", 40, replications=3, seed=8, multiplier=2.0)
        err, _ = run_replication("B", 40, "gkdr", derive_seed(8, 2), multiplier=2.0)
        assert err == res.per_replication_errors[2]

    def test_threads_do_not_change_results(self):
        a = run_synthetic_benchmark("A", 30, replications=3, seed=1, multiplier=2.0)
        b = run_synthetic_benchmark("A", 30, replications=3, seed=1, multiplier=2.0, threads=3)
        assert a.per_replication_errors == b.per_replication_errors

    def test_failures_are_recorded(self):
        # n=2 leaves too few points for 5 folds in every replication
        with pytest.raises(ConfigError, match="all 2 replications failed"):
            run_synthetic_benchmark("A", 2, replications=2)

    def test_to_dict_and_row(self):
        res = run_synthetic_benchmark("A", 30, replications=2, seed=0, multiplier=2.0)
        d = res.to_dict()
        assert d["replications"] == 2 and len(d["per_replication_errors"]) == 2
        assert res.table_row().startswith("(A) n=30")

    def test_invalid(self):
        with pytest.raises(ConfigError):
            run_synthetic_benchmark("C", 30)
        with pytest.raises(ConfigError):
            run_synthetic_benchmark("A", 30, replications=0)


def test_fit_beats_random_direction():
    # sanity: with a good bandwidth one-dimensional recovery is far from chance
    ds = gen_synth_A(200, seed=0)
    err, _ = run_replication("A", 200, "gkdr", 0, multiplier=2.0)
    rng = np.random.default_rng(0)
    chance = np.mean([subspace_error(ds.B0, random_frame(rng, 10, 1)) for _ in range(200)])
    assert err < chance / 2
