"""Logistic regression and linear SVM: separable-data sanity, determinism,
and loss gradients against central finite differences."""

import numpy as np
import pytest

from conftest import make_sparse
from liesensor.errors import TrainingDivergedError
from liesensor.labels import EmotionLabel
from liesensor.textclf import LinearHyper, predict_text, train_linear_svm, train_logistic
from liesensor.textclf.linear import hinge_loss_grad, logistic_loss_grad

H, S = EmotionLabel.HAPPINESS, EmotionLabel.SADNESS


def separable_set():
    X = [make_sparse(1, [(0, 1.0)]) for _ in range(50)]
    X += [make_sparse(1, [(0, -1.0)]) for _ in range(50)]
    y = [H] * 50 + [S] * 50
    return X, y


def _accuracy(model, X, y):
    return sum(predict_text(model, x).label == t for x, t in zip(X, y)) / len(y)


@pytest.mark.parametrize("trainer", [train_logistic, train_linear_svm])
class TestCommonContracts:
    def test_separable_data(self, trainer):
        X, y = separable_set()
        model = trainer(X, y, LinearHyper(epochs=100))
        assert _accuracy(model, X, y) >= 0.99

    def test_seed_determinism(self, trainer):
        X, y = separable_set()
        a = trainer(X, y, LinearHyper(epochs=10, seed=4))
        b = trainer(X, y, LinearHyper(epochs=10, seed=4))
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)

    def test_weights_finite(self, trainer):
        X, y = separable_set()
        model = trainer(X, y, LinearHyper(epochs=30))
        assert np.all(np.isfinite(model.weights)) and np.all(np.isfinite(model.bias))

    def test_hyper_validation(self, trainer):
        X, y = separable_set()
        with pytest.raises(ValueError):
            trainer(X, y, LinearHyper(learning_rate=0.0))
        with pytest.raises(ValueError):
            trainer(X, y, LinearHyper(epochs=0))

    def test_divergence_aborts_with_diagnostic(self, trainer):
        X, y = separable_set()
        with pytest.raises(TrainingDivergedError):
            trainer(X, y, LinearHyper(learning_rate=1e12, epochs=60, l2_lambda=1.0))


def test_huge_l2_shrinks_weights():
    X, y = separable_set()
    # lr * lambda < 1 so plain SGD contracts toward zero
    hyper = LinearHyper(learning_rate=5e-7, epochs=30, l2_lambda=1e6)
    for trainer in (train_logistic, train_linear_svm):
        model = trainer(X, y, hyper)
        assert np.linalg.norm(model.weights) < 1e-2


def test_svm_identical_features_predicts_majority():
    X = [make_sparse(2, [(0, 1.0), (1, 1.0)]) for _ in range(9)]
    y = [H] * 6 + [S] * 3
    model = train_linear_svm(X, y, LinearHyper(epochs=40))
    assert predict_text(model, X[0]).label == H


def test_zero_model_uniform_scores():
    X, y = separable_set()
    model = train_logistic(X, y, LinearHyper(epochs=1, learning_rate=1e-12))
    model.weights[:] = 0.0
    model.bias[:] = 0.0
    pred = predict_text(model, X[0])
    assert list(pred.scores.values()) == pytest.approx([0.5, 0.5], abs=1e-12)
    assert pred.label == H


class TestGradientsVsFiniteDifferences:
    @staticmethod
    def _check(loss_grad, seed, n_classes=3, v=8, n=3, l2=1e-3, h=1e-6, tol=1e-4):
        rng = np.random.default_rng(seed)
        while True:
            W = rng.normal(size=(n_classes, v))
            b = rng.normal(size=n_classes)
            Xd = rng.normal(size=(n, v))
            yi = rng.integers(0, n_classes, size=n)
            if loss_grad is hinge_loss_grad:
                # stay away from the hinge kink so fd is well-defined
                margins = Xd @ W.T + b
                t = -np.ones((n, n_classes))
                t[np.arange(n), yi] = 1.0
                if np.min(np.abs(1.0 - t * margins)) < 1e-3:
                    continue
            break
        _, gW, gb = loss_grad(W, b, Xd, yi, l2)

        def loss_at(Wv, bv):
            return loss_grad(Wv, bv, Xd, yi, l2)[0]

        for arr, grad in ((W, gW), (b, gb)):
            flat, gflat = arr.ravel(), grad.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                lp = loss_at(W, b)
                flat[i] = orig - h
                lm = loss_at(W, b)
                flat[i] = orig
                fd = (lp - lm) / (2 * h)
                err = abs(fd - gflat[i])
                # 1e-9 absolute floor: fd noise on an O(1) loss at h=1e-6
                assert err <= max(tol * max(abs(fd), abs(gflat[i])), 1e-9), (
                    f"seed={seed} idx={i} fd={fd} analytic={gflat[i]}"
                )

    @pytest.mark.parametrize("seed", range(25))
    def test_logistic_gradient(self, seed):
        self._check(logistic_loss_grad, seed)

    @pytest.mark.parametrize("seed", range(25))
    def test_hinge_subgradient(self, seed):
        self._check(hinge_loss_grad, seed + 1000)
