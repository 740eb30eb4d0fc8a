"""Decision tree and random forest behavior."""

import numpy as np
import pytest

from conftest import make_sparse
from liesensor.labels import EmotionLabel
from liesensor.textclf import (
    ForestHyper,
    predict_text,
    train_decision_tree,
    train_random_forest,
)

H, S, U, T = EmotionLabel.HAPPINESS, EmotionLabel.SADNESS, EmotionLabel.SURPRISE, EmotionLabel.HATE


def _dense_rows(rows):
    v = len(rows[0])
    return [make_sparse(v, [(i, float(c)) for i, c in enumerate(row) if c]) for row in rows]


def test_single_split_midpoint_threshold():
    X = _dense_rows([[0.0], [1.0]])
    y = [H, S]
    hyper = ForestHyper(n_trees=1, max_depth=1, min_leaf=1, bootstrap=False, feature_subsample=None)
    model = train_random_forest(X, y, hyper)
    tree = model.trees[0]
    assert tree.feature[0] == 0
    assert tree.threshold[0] == pytest.approx(0.5)
    assert predict_text(model, X[0]).label == H
    assert predict_text(model, X[1]).label == S


def test_depth1_cannot_represent_xor():
    rows = [[0, 0], [0, 1], [1, 0], [1, 1]] * 4
    y = ([H, S, S, H]) * 4
    X = _dense_rows(rows)
    hyper = ForestHyper(n_trees=1, max_depth=1, min_leaf=1, bootstrap=False, feature_subsample=None)
    model = train_random_forest(X, y, hyper)
    acc = sum(predict_text(model, x).label == t for x, t in zip(X, y)) / len(y)
    assert acc == pytest.approx(0.5)


def test_gaussian_blobs_high_accuracy():
    rng = np.random.default_rng(10)
    means = np.array([[0, 0], [8, 0], [0, 8], [8, 8]], dtype=float)
    rows, y = [], []
    for i, label in enumerate([H, S, U, T]):
        pts = rng.normal(means[i], 1.0, size=(40, 2))
        rows.extend(pts.tolist())
        y.extend([label] * 40)
    X = [make_sparse(2, [(0, r[0]), (1, r[1])]) for r in rows]
    model = train_random_forest(X, y, ForestHyper(n_trees=25, max_depth=8, min_leaf=1, seed=2))
    acc = sum(predict_text(model, x).label == t for x, t in zip(X, y)) / len(y)
    assert acc >= 0.95


def test_forest_reduces_to_decision_tree():
    rng = np.random.default_rng(5)
    rows = rng.integers(0, 5, size=(40, 6)).astype(float).tolist()
    y = [EmotionLabel(int(l)) for l in rng.integers(0, 4, size=40)]
    X = _dense_rows(rows)
    hyper = ForestHyper(n_trees=1, max_depth=6, min_leaf=1, bootstrap=False, feature_subsample=None, seed=9)
    forest = train_random_forest(X, y, hyper)
    tree, classes = train_decision_tree(X, y, hyper)
    assert classes == forest.classes
    for x in X:
        assert np.array_equal(tree.predict_dist(x.to_dense()), forest.trees[0].predict_dist(x.to_dense()))
        assert predict_text(forest, x).scores == pytest.approx(
            dict(zip(classes, tree.predict_dist(x.to_dense())))
        )


def test_depth_bound_holds():
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(120, 5)).tolist()
    y = [EmotionLabel(int(l)) for l in rng.integers(0, 4, size=120)]
    X = _dense_rows([[v for v in r] for r in rows])
    for depth in (1, 3, 5):
        model = train_random_forest(X, y, ForestHyper(n_trees=4, max_depth=depth, min_leaf=1, seed=1))
        for tree in model.trees:
            assert tree.max_path_depth() <= depth


def test_seed_determinism():
    rng = np.random.default_rng(2)
    rows = rng.integers(0, 3, size=(50, 8)).astype(float).tolist()
    y = [EmotionLabel(int(l)) for l in rng.integers(0, 4, size=50)]
    X = _dense_rows(rows)
    a = train_random_forest(X, y, ForestHyper(n_trees=8, seed=3, min_leaf=1))
    b = train_random_forest(X, y, ForestHyper(n_trees=8, seed=3, min_leaf=1))
    for ta, tb in zip(a.trees, b.trees):
        assert np.array_equal(ta.feature, tb.feature)
        assert np.array_equal(ta.threshold, tb.threshold)
        assert np.array_equal(ta.distribution, tb.distribution)


def test_leaf_distributions_are_probabilities():
    rng = np.random.default_rng(8)
    rows = rng.integers(0, 4, size=(60, 5)).astype(float).tolist()
    y = [EmotionLabel(int(l)) for l in rng.integers(0, 4, size=60)]
    model = train_random_forest(_dense_rows(rows), y, ForestHyper(n_trees=5, seed=0))
    for x in _dense_rows(rows[:10]):
        scores = predict_text(model, x).scores
        assert sum(scores.values()) == pytest.approx(1.0, abs=1e-9)


def test_hyper_validation():
    X = _dense_rows([[0.0], [1.0]])
    with pytest.raises(ValueError):
        train_random_forest(X, [H, S], ForestHyper(n_trees=0))
    with pytest.raises(ValueError):
        train_random_forest(X, [H, S], ForestHyper(max_depth=0))
