"""Random forest over Gini-split decision trees.

Trees are trained on bootstrap samples with per-split feature subsampling
(sqrt(V) by default); split thresholds are midpoints of adjacent distinct
sorted values; leaves store label-count distributions. Per-tree RNG streams
are spawned from the model seed, so results are bit-identical regardless of
training order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from liesensor.features import SparseVector
from liesensor.labels import EmotionLabel
from liesensor.textclf.common import design_matrix, encode_labels, resolve_classes

FeatureSubsample = Union[str, int, None]


@dataclass(frozen=True)
class ForestHyper:
    n_trees: int = 50
    max_depth: int = 12
    min_leaf: int = 2
    feature_subsample: FeatureSubsample = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")


@dataclass
class DecisionTree:
    """Flat-array tree: feature[i] == -1 marks node i as a leaf."""

    feature: np.ndarray  # int64
    threshold: np.ndarray  # float64
    left: np.ndarray  # int64, -1 at leaves
    right: np.ndarray  # int64, -1 at leaves
    distribution: np.ndarray  # (n_nodes, C) leaf label distributions

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def max_path_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        deepest = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                for child in (self.left[i], self.right[i]):
                    depth[child] = depth[i] + 1
                    deepest = max(deepest, int(depth[child]))
        return deepest

    def predict_dist(self, dense_x: np.ndarray) -> np.ndarray:
        node = 0
        while self.feature[node] >= 0:
            if dense_x[self.feature[node]] <= self.threshold[node]:
                node = int(self.left[node])
            else:
                node = int(self.right[node])
        return self.distribution[node]


@dataclass
class RandomForestModel:
    classes: tuple[EmotionLabel, ...]
    trees: list[DecisionTree]
    hyper: ForestHyper
    dimension: int

    def predict_dist(self, x: SparseVector) -> np.ndarray:
        if x.dimension != self.dimension:
            raise ValueError(
                f"input dimension {x.dimension} != model dimension {self.dimension}"
            )
        dense = x.to_dense()
        acc = np.zeros(len(self.classes), dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict_dist(dense)
        return acc / len(self.trees)


def _gini_candidates(values: np.ndarray, yi: np.ndarray, n_classes: int, min_leaf: int):
    """Best (weighted_gini, threshold) over adjacent-midpoint splits, or None."""
    n = values.size
    order = np.argsort(values, kind="stable")
    v = values[order]
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), yi[order]] = 1.0
    prefix = np.cumsum(onehot, axis=0)  # prefix[k] = counts of first k+1 samples
    boundaries = np.nonzero(v[:-1] < v[1:])[0]  # split after position k
    if boundaries.size == 0:
        return None
    n_left = boundaries + 1
    n_right = n - n_left
    valid = (n_left >= min_leaf) & (n_right >= min_leaf)
    if not np.any(valid):
        return None
    boundaries = boundaries[valid]
    n_left = n_left[valid].astype(np.float64)
    n_right = n_right[valid].astype(np.float64)
    left_counts = prefix[boundaries]
    right_counts = prefix[-1] - left_counts
    gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
    gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    best = int(np.argmin(weighted))  # lowest threshold wins ties
    k = boundaries[best]
    threshold = 0.5 * (v[k] + v[k + 1])
    return float(weighted[best]), float(threshold)


class _TreeBuilder:
    def __init__(self, Xc: sp.csc_matrix, yi: np.ndarray, n_classes: int, hyper: ForestHyper):
        self.Xc = Xc
        self.yi = yi
        self.n_classes = n_classes
        self.hyper = hyper
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.dist: list[np.ndarray] = []

    def _column(self, f: int) -> np.ndarray:
        start, end = self.Xc.indptr[f], self.Xc.indptr[f + 1]
        col = np.zeros(self.Xc.shape[0], dtype=np.float64)
        col[self.Xc.indices[start:end]] = self.Xc.data[start:end]
        return col

    def _candidate_features(self, rng: np.random.Generator) -> np.ndarray:
        v = self.Xc.shape[1]
        sub = self.hyper.feature_subsample
        if sub is None:
            return np.arange(v)
        k = max(1, int(np.sqrt(v))) if sub == "sqrt" else min(int(sub), v)
        if k >= v:
            return np.arange(v)
        return np.sort(rng.choice(v, size=k, replace=False))

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.dist.append(np.zeros(self.n_classes))
        return len(self.feature) - 1

    def _leaf(self, node: int, sample_idx: np.ndarray) -> None:
        counts = np.bincount(self.yi[sample_idx], minlength=self.n_classes).astype(np.float64)
        self.dist[node] = counts / counts.sum()

    def build(self, sample_idx: np.ndarray, rng: np.random.Generator) -> DecisionTree:
        root = self._new_node()
        self._grow(root, sample_idx, depth=0, rng=rng)
        return DecisionTree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            distribution=np.vstack(self.dist),
        )

    def _grow(self, node: int, sample_idx: np.ndarray, depth: int, rng) -> None:
        y_node = self.yi[sample_idx]
        if (
            depth >= self.hyper.max_depth
            or sample_idx.size < 2 * self.hyper.min_leaf
            or np.all(y_node == y_node[0])
        ):
            self._leaf(node, sample_idx)
            return
        best = None  # (gini, feature, threshold, column)
        for f in self._candidate_features(rng):
            col = self._column(int(f))[sample_idx]
            found = _gini_candidates(col, y_node, self.n_classes, self.hyper.min_leaf)
            if found is None:
                continue
            gini, thr = found
            if best is None or gini < best[0]:
                best = (gini, int(f), thr, col)
        if best is None:
            self._leaf(node, sample_idx)
            return
        _, f, thr, col = best
        go_left = col <= thr
        left_node = self._new_node()
        right_node = self._new_node()
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = left_node
        self.right[node] = right_node
        self.dist[node] = np.bincount(y_node, minlength=self.n_classes) / y_node.size
        self._grow(left_node, sample_idx[go_left], depth + 1, rng)
        self._grow(right_node, sample_idx[~go_left], depth + 1, rng)


def train_decision_tree(
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    hyper: ForestHyper = ForestHyper(n_trees=1, bootstrap=False, feature_subsample=None),
    classes: Optional[Sequence[EmotionLabel]] = None,
    rng: Optional[np.random.Generator] = None,
) -> tuple[DecisionTree, tuple[EmotionLabel, ...]]:
    """A single tree over the full sample (no bootstrap)."""
    hyper.validate()
    cls = resolve_classes(y, classes)
    yi = encode_labels(y, cls)
    Xc = design_matrix(X).tocsc()
    builder = _TreeBuilder(Xc, yi, len(cls), hyper)
    tree = builder.build(
        np.arange(len(y)), rng if rng is not None else np.random.default_rng(hyper.seed)
    )
    return tree, cls


def train_random_forest(
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    hyper: ForestHyper = ForestHyper(),
    classes: Optional[Sequence[EmotionLabel]] = None,
) -> RandomForestModel:
    hyper.validate()
    if len(X) != len(y):
        raise ValueError("X and y length mismatch")
    cls = resolve_classes(y, classes)
    yi = encode_labels(y, cls)
    Xc = design_matrix(X).tocsc()
    n = len(y)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(hyper.seed).spawn(hyper.n_trees)]
    trees = []
    for rng in streams:
        if hyper.bootstrap:
            sample_idx = np.sort(rng.integers(0, n, size=n))
        else:
            sample_idx = np.arange(n)
        builder = _TreeBuilder(Xc, yi, len(cls), hyper)
        trees.append(builder.build(sample_idx, rng))
    return RandomForestModel(classes=cls, trees=trees, hyper=hyper, dimension=Xc.shape[1])
