import math
import statistics

import numpy as np
import pytest

from dami.analysis import REPORT_FAMILIES, cv, invariance_report, knn_crossval, sample_dual
from dami.datasets import classification_dataset, mirrored_cloud, random_cloud
from dami.enumerate import reference_invariants


def test_cv_reference():
    vals = [1.0, 2.0, 4.0, 5.0]
    assert cv(vals) == pytest.approx(statistics.pstdev(vals) / statistics.mean(vals), rel=1e-14)
    assert cv([-2.0, -4.0]) == pytest.approx(1 / 3)


def test_cv_edge_cases():
    assert cv([0.0, 0.0, 0.0]) == 0.0
    assert cv([3.0, 3.0]) == 0.0
    assert cv([1.0, -1.0]) == math.inf
    with pytest.raises(ValueError):
        cv([1.0])


def test_sample_dual_families():
    obj = random_cloud(0, 10)
    rng = np.random.default_rng(0)
    s, c = sample_dual(obj, "channel", rng)
    assert np.array_equal(s.linear, np.eye(3)) and not np.array_equal(c.linear, np.eye(3))
    s, c = sample_dual(obj, "identity", rng)
    assert np.array_equal(s.linear, np.eye(3)) and np.array_equal(c.linear, np.eye(3))


def test_invariance_report_shape_and_determinism():
    obj = random_cloud(1, 60)
    exprs = reference_invariants([1, 6, 12])
    a = invariance_report(obj, exprs, trials=4, seed=3)
    b = invariance_report(obj, exprs, trials=4, seed=3)
    assert a.columns == list(REPORT_FAMILIES) + ["all"]
    assert a.values.shape == (3, len(REPORT_FAMILIES) + 1)
    assert np.array_equal(a.values, b.values)
    assert np.all(a.values < 1e-8)
    assert [r["invariant"] for r in a.rows()] == ["ID 1", "ID 6", "ID 12"]


def test_mirror_collapses_odd_invariant():
    obj = mirrored_cloud(2, 40)
    (e1,) = reference_invariants([1])
    assert abs(invariance_report(obj, [e1], trials=2).raw["dual"][0, 0]) < 1e-12


def test_knn_perfect_on_separable():
    rng = np.random.default_rng(0)
    X = np.r_[rng.normal(0, 0.1, (20, 2)), rng.normal(5, 0.1, (20, 2))]
    y = [0] * 20 + [1] * 20
    rep = knn_crossval(X, y, folds=5)
    assert rep.mean_accuracy == 1.0 and rep.stratified and len(rep.fold_accuracies) == 5


def test_knn_drops_nan_columns_and_unstratified_fallback():
    rng = np.random.default_rng(1)
    X = np.c_[np.r_[rng.normal(0, 0.1, 6), rng.normal(5, 0.1, 6)], np.full(12, np.nan)]
    y = [0] * 6 + [1] * 6
    with pytest.warns(UserWarning, match="unstratified"):
        rep = knn_crossval(X, y, folds=10)
    assert rep.dropped_columns == [1] and not rep.stratified


def test_knn_errors():
    with pytest.raises(ValueError):
        knn_crossval(np.zeros((3, 2)), [0, 1, 0], folds=10)
    with pytest.raises(ValueError):
        knn_crossval(np.full((12, 1), np.nan), [0, 1] * 6, folds=2)


def test_dataset_shape_and_seed():
    data = classification_dataset(classes=3, variants=2, n_points=40, seed=5)
    assert [lab for lab, _ in data] == ["0"] * 3 + ["1"] * 3 + ["2"] * 3
    again = classification_dataset(classes=3, variants=2, n_points=40, seed=5)
    assert all(a == b for (_, a), (_, b) in zip(data, again))
