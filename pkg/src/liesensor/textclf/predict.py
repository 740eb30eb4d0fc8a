"""Unified prediction over the four model kinds and best-model selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from liesensor.features import SparseVector
from liesensor.labels import EmotionLabel, EmotionPrediction, make_prediction
from liesensor.textclf.common import check_dimension
from liesensor.textclf.forest import RandomForestModel
from liesensor.textclf.linear import LinearModel, softmax
from liesensor.textclf.naive_bayes import NaiveBayesModel

# Fixed preference order for accuracy ties.
MODEL_ORDER = ("naive_bayes", "linear_svm", "logistic_regression", "random_forest")


def predict_text(model, x: SparseVector) -> EmotionPrediction:
    """Per-class probability scores and the argmax label.

    Naive Bayes and logistic models give posterior probabilities, forests the
    mean leaf distribution, and SVMs a softmax over their margins so every
    model kind reports on the same scale.
    """
    if isinstance(model, NaiveBayesModel):
        check_dimension(x, model.dimension)
        scores = softmax(model.joint_log_likelihood(x))
    elif isinstance(model, LinearModel):
        scores = softmax(model.margins(x))
    elif isinstance(model, RandomForestModel):
        scores = model.predict_dist(x)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return make_prediction(model.classes, scores)


def accuracy(model, X: Sequence[SparseVector], y: Sequence[EmotionLabel]) -> float:
    """Exact-match fraction on a labeled set."""
    if len(X) == 0:
        raise ValueError("empty evaluation set")
    hits = sum(
        1 for x, lbl in zip(X, y) if predict_text(model, x).label == EmotionLabel(int(lbl))
    )
    return hits / len(X)


@dataclass
class ModelSelection:
    """Validation accuracy per model and the chosen name.

    The chosen model attains the maximum accuracy; ties go to the earliest
    name in MODEL_ORDER.
    """

    per_model_accuracy: dict[str, float]
    chosen: str

    def to_dict(self) -> dict:
        return {"per_model_accuracy": dict(self.per_model_accuracy), "chosen": self.chosen}


def select_best(
    models: Sequence[tuple[str, object]],
    X_val: Sequence[SparseVector],
    y_val: Sequence[EmotionLabel],
) -> ModelSelection:
    if not models:
        raise ValueError("no models to select from")
    if len(X_val) == 0:
        raise ValueError("empty validation set")
    table = {name: accuracy(model, X_val, y_val) for name, model in models}

    def rank(name: str) -> int:
        return MODEL_ORDER.index(name) if name in MODEL_ORDER else len(MODEL_ORDER)

    best = max(table, key=lambda name: (table[name], -rank(name)))
    return ModelSelection(per_model_accuracy=table, chosen=best)
