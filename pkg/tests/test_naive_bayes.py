"""Multinomial naive Bayes against a brute-force Bayes-rule oracle."""

import itertools
import math

import numpy as np
import pytest

from conftest import make_sparse
from liesensor.labels import EmotionLabel
from liesensor.textclf import predict_text, train_naive_bayes

H, S, U, T = EmotionLabel.HAPPINESS, EmotionLabel.SADNESS, EmotionLabel.SURPRISE, EmotionLabel.HATE


def brute_force_posteriors(count_rows, y, alpha, x_counts):
    """Bayes rule from raw counts, no logs: the independent oracle."""
    classes = sorted(set(y))
    v = len(count_rows[0])
    joint = []
    for c in classes:
        rows = [r for r, lbl in zip(count_rows, y) if lbl == c]
        prior = len(rows) / len(y)
        term_counts = [sum(r[t] for r in rows) for t in range(v)]
        total = sum(term_counts)
        likelihood = 1.0
        for t in range(v):
            p_t = (term_counts[t] + alpha) / (total + alpha * v)
            likelihood *= p_t ** x_counts[t]
        joint.append(prior * likelihood)
    z = sum(joint)
    return classes, [j / z for j in joint]


def _rows_to_sparse(rows):
    v = len(rows[0])
    return [make_sparse(v, [(i, c) for i, c in enumerate(row) if c]) for row in rows]


class TestTrain:
    def test_single_term_single_class(self):
        model = train_naive_bayes([make_sparse(1, [(0, 1)])], [H], alpha=1.0)
        assert math.exp(model.feature_log_prob[0, 0]) == pytest.approx(1.0, abs=1e-12)

    def test_two_class_hand_table(self):
        # docs: class H: (2,0), (1,1); class S: (0,3)
        rows = [[2, 0], [1, 1], [0, 3]]
        y = [H, H, S]
        model = train_naive_bayes(_rows_to_sparse(rows), y, alpha=1.0)
        # class H: counts (3,1), total 4 -> P(t0|H) = 4/6, P(t1|H) = 2/6
        probs = np.exp(model.feature_log_prob)
        assert probs[0] == pytest.approx([4 / 6, 2 / 6], abs=1e-12)
        # class S: counts (0,3), total 3 -> P = (1/5, 4/5)
        assert probs[1] == pytest.approx([1 / 5, 4 / 5], abs=1e-12)
        assert np.exp(model.class_log_prior) == pytest.approx([2 / 3, 1 / 3], abs=1e-12)

    def test_likelihood_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        rows = rng.integers(0, 4, size=(12, 6)).tolist()
        y = [H, S, U, T] * 3
        model = train_naive_bayes(_rows_to_sparse(rows), y, alpha=0.7)
        sums = np.exp(model.feature_log_prob).sum(axis=1)
        assert sums == pytest.approx(np.ones(4), abs=1e-9)

    def test_missing_class_errors(self):
        X = _rows_to_sparse([[1, 0], [0, 1]])
        with pytest.raises(ValueError, match="zero examples"):
            train_naive_bayes(X, [H, S], classes=[H, S, U, T])

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            train_naive_bayes([make_sparse(1, [(0, 1)])], [H], alpha=0.0)


class TestPredict:
    def test_uniform_model_ties_to_lowest_label(self):
        rows = [[1, 1], [1, 1], [1, 1], [1, 1]]
        y = [H, S, U, T]
        model = train_naive_bayes(_rows_to_sparse(rows), y, alpha=1.0)
        pred = predict_text(model, make_sparse(2, [(0, 3)]))
        assert pred.label == H
        assert list(pred.scores.values()) == pytest.approx([0.25] * 4, abs=1e-9)

    def test_posterior_matches_bayes_oracle_hand_case(self):
        rows = [[2, 0], [1, 1], [0, 3]]
        y = [H, S, S]
        model = train_naive_bayes(_rows_to_sparse(rows), y, alpha=1.0)
        x_counts = [1, 2]
        classes, want = brute_force_posteriors(rows, y, 1.0, x_counts)
        pred = predict_text(model, make_sparse(2, [(0, 1), (1, 2)]))
        got = [pred.scores[c] for c in classes]
        assert got == pytest.approx(want, abs=1e-9)

    def test_scaling_counts_keeps_argmax(self):
        rng = np.random.default_rng(3)
        rows = rng.integers(0, 5, size=(8, 4)).tolist()
        y = [H, S] * 4
        model = train_naive_bayes(_rows_to_sparse(rows), y)
        for _ in range(20):
            counts = rng.integers(0, 4, size=4)
            if counts.sum() == 0:
                continue
            x1 = make_sparse(4, [(i, c) for i, c in enumerate(counts) if c])
            x3 = make_sparse(4, [(i, 3 * c) for i, c in enumerate(counts) if c])
            assert predict_text(model, x1).label == predict_text(model, x3).label

    def test_dimension_mismatch(self):
        model = train_naive_bayes(_rows_to_sparse([[1, 0], [0, 1]]), [H, S])
        with pytest.raises(ValueError, match="dimension"):
            predict_text(model, make_sparse(3, [(0, 1)]))


class TestOracleEnumeration:
    """Exhaustive small corpora + random larger ones, all vs brute force."""

    def test_exhaustive_tiny_corpora(self):
        checked = 0
        # all 2-doc corpora over V=2 with per-doc counts in {0,1,2}, 2 classes
        cells = list(itertools.product(range(3), repeat=2))
        for d1, d2 in itertools.product(cells, repeat=2):
            rows = [list(d1), list(d2)]
            y = [H, S]
            X = _rows_to_sparse(rows)
            model = train_naive_bayes(X, y, alpha=1.0)
            for x_counts in cells:
                classes, want = brute_force_posteriors(rows, y, 1.0, list(x_counts))
                x = make_sparse(2, [(i, c) for i, c in enumerate(x_counts) if c])
                pred = predict_text(model, x)
                got = [pred.scores[c] for c in classes]
                assert got == pytest.approx(want, abs=1e-9)
                checked += 1
        assert checked == 81 * 9

    @pytest.mark.parametrize("seed", range(10))
    def test_random_corpora_up_to_v5_n10(self, seed):
        rng = np.random.default_rng(seed)
        v = int(rng.integers(1, 6))
        n = int(rng.integers(2, 11))
        n_classes = int(rng.integers(2, 5))
        labels = [EmotionLabel(i % n_classes) for i in range(n)]
        rows = rng.integers(0, 4, size=(n, v)).tolist()
        alpha = float(rng.uniform(0.3, 2.0))
        model = train_naive_bayes(_rows_to_sparse(rows), labels, alpha=alpha)
        for _ in range(10):
            x_counts = rng.integers(0, 4, size=v).tolist()
            classes, want = brute_force_posteriors(rows, labels, alpha, x_counts)
            x = make_sparse(v, [(i, c) for i, c in enumerate(x_counts) if c])
            pred = predict_text(model, x)
            got = [pred.scores[c] for c in classes]
            assert got == pytest.approx(want, abs=1e-9)
