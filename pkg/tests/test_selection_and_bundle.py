"""Best-model selection and the bundle file format."""

import numpy as np
import pytest

from conftest import make_sparse
from liesensor.errors import ChecksumError, DataFormatError
from liesensor.features import IdfTable, fit_idf, vectorize_corpus
from liesensor.labels import EmotionLabel
from liesensor.synthetic import tiny_text_corpus
from liesensor.textclf import (
    ForestHyper,
    LinearHyper,
    ModelSelection,
    TextTrainConfig,
    accuracy,
    load_bundle,
    predict_text,
    save_bundle,
    select_best,
    train_linear_svm,
    train_logistic,
    train_naive_bayes,
    train_random_forest,
    train_text_bundle,
)
from liesensor.textprep import prepare_text

H, S = EmotionLabel.HAPPINESS, EmotionLabel.SADNESS


def _toy_models():
    X = [make_sparse(1, [(0, 1.0)]) for _ in range(20)]
    X += [make_sparse(1, [(0, -1.0)]) for _ in range(20)]
    y = [H] * 20 + [S] * 20
    return X, y


class TestSelectBest:
    def test_highest_accuracy_wins(self):
        X, y = _toy_models()
        nb = train_naive_bayes([make_sparse(1, [(0, 1)]), make_sparse(1, [])], [H, S])
        svm = train_linear_svm(X, y, LinearHyper(epochs=50))
        sel = select_best([("naive_bayes", nb), ("linear_svm", svm)], X, y)
        assert sel.chosen == "linear_svm"
        assert sel.per_model_accuracy["linear_svm"] >= sel.per_model_accuracy["naive_bayes"]

    def test_tie_breaks_by_fixed_order(self):
        X, y = _toy_models()
        svm = train_linear_svm(X, y, LinearHyper(epochs=50))
        lr = train_logistic(X, y, LinearHyper(epochs=50))
        sel = select_best([("logistic_regression", lr), ("linear_svm", svm)], X, y)
        assert sel.per_model_accuracy["linear_svm"] == sel.per_model_accuracy["logistic_regression"]
        assert sel.chosen == "linear_svm"  # earlier in the fixed order

    def test_single_model(self):
        X, y = _toy_models()
        nb = train_naive_bayes(X, y)
        sel = select_best([("naive_bayes", nb)], X, y)
        assert sel.chosen == "naive_bayes"

    def test_chosen_never_below_others(self):
        X, y = _toy_models()
        models = [
            ("naive_bayes", train_naive_bayes(X, y)),
            ("linear_svm", train_linear_svm(X, y, LinearHyper(epochs=20))),
            ("logistic_regression", train_logistic(X, y, LinearHyper(epochs=20))),
            ("random_forest", train_random_forest(X, y, ForestHyper(n_trees=3, min_leaf=1))),
        ]
        sel = select_best(models, X, y)
        best = sel.per_model_accuracy[sel.chosen]
        assert all(best >= acc for acc in sel.per_model_accuracy.values())


def _std_selection():
    return ModelSelection(
        per_model_accuracy={"naive_bayes": 0.9, "linear_svm": 0.8}, chosen="naive_bayes"
    )


class TestBundleRoundTrip:
    @pytest.mark.parametrize("kind", ["naive_bayes", "linear_svm", "logistic_regression", "random_forest"])
    def test_roundtrip_each_model_kind(self, tmp_path, kind):
        docs = [prepare_text(r.content) for r in tiny_text_corpus()]
        labels = [r.label for r in tiny_text_corpus()]
        from liesensor.textprep import build_vocabulary

        vocab = build_vocabulary(docs, min_count=2)
        X = vectorize_corpus(docs, vocab, "count")
        trainers = {
            "naive_bayes": lambda: train_naive_bayes(X, labels),
            "linear_svm": lambda: train_linear_svm(X, labels, LinearHyper(epochs=5)),
            "logistic_regression": lambda: train_logistic(X, labels, LinearHyper(epochs=5)),
            "random_forest": lambda: train_random_forest(X, labels, ForestHyper(n_trees=4, seed=1)),
        }
        model = trainers[kind]()
        from liesensor.textclf import TextModelBundle

        bundle = TextModelBundle(
            vocabulary=vocab, feature_kind="count", model_kind=kind,
            model=model, selection=_std_selection(),
        )
        path = tmp_path / "model.bundle"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        assert loaded.model_kind == kind
        assert loaded.feature_kind == "count"
        assert loaded.vocabulary.term_to_index == vocab.term_to_index
        assert loaded.selection.chosen == "naive_bayes"
        for x in X[:8]:
            a = predict_text(model, x)
            b = predict_text(loaded.model, x)
            assert a.label == b.label
            assert list(a.scores.values()) == pytest.approx(list(b.scores.values()), abs=0)

    def test_idf_roundtrip(self, tmp_path):
        docs = [["a", "b"], ["a"], ["b", "b", "c"]]
        from liesensor.textprep import build_vocabulary

        vocab = build_vocabulary(docs, min_count=1)
        idf = fit_idf(docs, vocab)
        X = vectorize_corpus(docs, vocab, "tfidf", idf)
        model = train_naive_bayes(X, [H, S, H])
        from liesensor.textclf import TextModelBundle

        bundle = TextModelBundle(
            vocabulary=vocab, feature_kind="tfidf", model_kind="naive_bayes",
            model=model, selection=_std_selection(), idf=idf,
        )
        path = tmp_path / "model.bundle"
        save_bundle(bundle, path)
        loaded = load_bundle(path)
        assert loaded.idf is not None
        assert loaded.idf.doc_count == 3
        assert np.array_equal(loaded.idf.idf, idf.idf)

    def test_truncated_file_checksum_error(self, tmp_path):
        bundle, _ = train_text_bundle(tiny_text_corpus(), TextTrainConfig(train_fraction=0.75, seed=5))
        path = tmp_path / "model.bundle"
        save_bundle(bundle, path)
        data = path.read_bytes()
        (tmp_path / "cut.bundle").write_bytes(data[: len(data) - 25])
        with pytest.raises(ChecksumError):
            load_bundle(tmp_path / "cut.bundle")

    def test_corrupted_byte_checksum_error(self, tmp_path):
        bundle, _ = train_text_bundle(tiny_text_corpus(), TextTrainConfig(train_fraction=0.75, seed=5))
        path = tmp_path / "model.bundle"
        save_bundle(bundle, path)
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        (tmp_path / "bad.bundle").write_bytes(bytes(data))
        with pytest.raises(ChecksumError):
            load_bundle(tmp_path / "bad.bundle")

    def test_not_a_bundle(self, tmp_path):
        path = tmp_path / "junk"
        path.write_bytes(b"definitely not a bundle")
        with pytest.raises(DataFormatError):
            load_bundle(path)


def test_pipeline_end_to_end_selection_table():
    bundle, selection = train_text_bundle(
        tiny_text_corpus(), TextTrainConfig(train_fraction=0.75, seed=5)
    )
    assert set(selection.per_model_accuracy) == {
        "naive_bayes", "linear_svm", "logistic_regression", "random_forest",
    }
    assert selection.chosen in selection.per_model_accuracy
    assert bundle.model_kind == selection.chosen
    x = bundle.vectorize(prepare_text("so happy and full of joy"))
    assert predict_text(bundle.model, x).label == H
