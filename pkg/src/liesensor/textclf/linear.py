"""Linear classifiers trained by mini-batch SGD: softmax logistic regression
and a one-vs-rest hinge-loss SVM.

Both share the hyperparameter set, the epoch/batch schedule and the
determinism contract (identical seed, identical weights). The loss each
minimizes is exposed as a standalone function so gradients can be checked
against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from liesensor.errors import TrainingDivergedError
from liesensor.features import SparseVector
from liesensor.labels import EmotionLabel
from liesensor.textclf.common import (
    check_dimension,
    design_matrix,
    encode_labels,
    resolve_classes,
)


@dataclass(frozen=True)
class LinearHyper:
    learning_rate: float = 0.1
    epochs: int = 30
    l2_lambda: float = 1e-4
    seed: int = 0
    batch_size: int = 32

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class LinearModel:
    """weights (C, V) + bias (C,); kind is "logistic" or "svm"."""

    classes: tuple[EmotionLabel, ...]
    weights: np.ndarray
    bias: np.ndarray
    kind: str
    hyper: LinearHyper

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def margins(self, x: SparseVector) -> np.ndarray:
        check_dimension(x, self.dimension)
        contrib = self.weights[:, x.indices] @ x.values if x.nnz else 0.0
        return self.bias + contrib


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def logistic_loss_grad(
    W: np.ndarray, b: np.ndarray, Xd: np.ndarray, yi: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy + (lambda/2)||W||^2 and its gradient.

    Dense inputs: Xd (n, V), yi class indices (n,).
    """
    n = Xd.shape[0]
    logits = Xd @ W.T + b
    probs = softmax(logits)
    eps = 1e-300
    data_loss = -np.mean(np.log(probs[np.arange(n), yi] + eps))
    loss = data_loss + 0.5 * l2_lambda * float(np.sum(W * W))
    delta = probs
    delta[np.arange(n), yi] -= 1.0
    grad_W = delta.T @ Xd / n + l2_lambda * W
    grad_b = delta.sum(axis=0) / n
    return float(loss), grad_W, grad_b


def hinge_loss_grad(
    W: np.ndarray, b: np.ndarray, Xd: np.ndarray, yi: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """One-vs-rest hinge loss + (lambda/2)||W||^2 and a subgradient.

    Targets are +1 for the true class and -1 elsewhere; the per-class hinge
    terms are averaged over samples and summed over classes.
    """
    n, _ = Xd.shape
    c = W.shape[0]
    margins = Xd @ W.T + b  # (n, C)
    t = -np.ones((n, c))
    t[np.arange(n), yi] = 1.0
    slack = 1.0 - t * margins
    active = slack > 0.0
    data_loss = float(np.sum(slack[active])) / n
    loss = data_loss + 0.5 * l2_lambda * float(np.sum(W * W))
    coeff = np.where(active, -t, 0.0)  # d slack / d margin
    grad_W = coeff.T @ Xd / n + l2_lambda * W
    grad_b = coeff.sum(axis=0) / n
    return float(loss), grad_W, grad_b


_LOSSES = {"logistic": logistic_loss_grad, "svm": hinge_loss_grad}


def _train_sgd(
    kind: str,
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    hyper: LinearHyper,
    classes: Optional[Sequence[EmotionLabel]],
) -> LinearModel:
    hyper.validate()
    if len(X) != len(y):
        raise ValueError("X and y length mismatch")
    cls = resolve_classes(y, classes)
    yi = encode_labels(y, cls)
    mat = design_matrix(X).tocsr()
    n, v = mat.shape
    c = len(cls)
    W = np.zeros((c, v), dtype=np.float64)
    b = np.zeros(c, dtype=np.float64)
    loss_grad = _LOSSES[kind]
    rng = np.random.default_rng(hyper.seed)
    for epoch in range(hyper.epochs):
        lr = hyper.learning_rate / (1.0 + 0.01 * epoch)
        order = rng.permutation(n)
        for start in range(0, n, hyper.batch_size):
            batch = order[start : start + hyper.batch_size]
            Xd = mat[batch].toarray()
            with np.errstate(over="ignore", invalid="ignore"):
                loss, gW, gb = loss_grad(W, b, Xd, yi[batch], hyper.l2_lambda)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"{kind} training diverged: non-finite loss at epoch {epoch}"
                )
            W -= lr * gW
            b -= lr * gb
    if not np.all(np.isfinite(W)) or not np.all(np.isfinite(b)):
        raise TrainingDivergedError(f"{kind} training produced non-finite weights")
    return LinearModel(classes=cls, weights=W, bias=b, kind=kind, hyper=hyper)


def train_logistic(
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    hyper: LinearHyper = LinearHyper(),
    classes: Optional[Sequence[EmotionLabel]] = None,
) -> LinearModel:
    return _train_sgd("logistic", X, y, hyper, classes)


def train_linear_svm(
    X: Sequence[SparseVector],
    y: Sequence[EmotionLabel],
    hyper: LinearHyper = LinearHyper(),
    classes: Optional[Sequence[EmotionLabel]] = None,
) -> LinearModel:
    return _train_sgd("svm", X, y, hyper, classes)
