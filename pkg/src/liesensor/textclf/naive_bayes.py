"""Multinomial naive Bayes with Laplace smoothing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from liesensor.features import SparseVector
from liesensor.labels import EmotionLabel
from liesensor.textclf.common import design_matrix, encode_labels, resolve_classes


@dataclass
class NaiveBayesModel:
    """log P(class) and log P(term | class) tables.

    Each likelihood row exponentiates and sums to 1: the smoothed estimate is
    (count_tc + alpha) / (count_c + alpha * V).
    """

    classes: tuple[EmotionLabel, ...]
    class_log_prior: np.ndarray  # (C,)
    feature_log_prob: np.ndarray  # (C, V)
    alpha: float

    @property
    def dimension(self) -> int:
        return self.feature_log_prob.shape[1]

    def joint_log_likelihood(self, x: SparseVector) -> np.ndarray:
        contrib = self.feature_log_prob[:, x.indices] @ x.values if x.nnz else 0.0
        return self.class_log_prior + contrib


def train_naive_bayes(
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    alpha: float = 1.0,
    classes: Optional[Sequence[EmotionLabel]] = None,
) -> NaiveBayesModel:
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if len(X) != len(y):
        raise ValueError("X and y length mismatch")
    cls = resolve_classes(y, classes)
    yi = encode_labels(y, cls)
    mat = design_matrix(X)
    n_classes, v = len(cls), mat.shape[1]
    term_counts = np.zeros((n_classes, v), dtype=np.float64)
    class_counts = np.zeros(n_classes, dtype=np.float64)
    for c in range(n_classes):
        rows = mat[yi == c]
        term_counts[c] = np.asarray(rows.sum(axis=0)).ravel()
        class_counts[c] = rows.shape[0]
    log_prior = np.log(class_counts / len(y))
    totals = term_counts.sum(axis=1, keepdims=True)
    log_prob = np.log(term_counts + alpha) - np.log(totals + alpha * v)
    return NaiveBayesModel(
        classes=cls,
        class_log_prior=log_prior,
        feature_log_prob=log_prob,
        alpha=float(alpha),
    )
