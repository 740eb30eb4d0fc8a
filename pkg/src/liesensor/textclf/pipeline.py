"""End-to-end text-channel training: preprocess, vectorize, train the four
classifiers, pick the best on the validation split, and assemble a bundle."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from liesensor.corpus import LabeledText, SplitSpec, split_dataset
from liesensor.features import fit_idf, vectorize_corpus
from liesensor.textclf.bundle import TextModelBundle
from liesensor.textclf.forest import ForestHyper, train_random_forest
from liesensor.textclf.linear import LinearHyper, train_linear_svm, train_logistic
from liesensor.textclf.naive_bayes import train_naive_bayes
from liesensor.textclf.predict import ModelSelection, select_best
from liesensor.textprep import build_vocabulary, prepare_text

log = logging.getLogger(__name__)

MODEL_CANONICAL_KINDS = {
    "naive_bayes": "naive_bayes",
    "linear_svm": "linear_svm",
    "logistic_regression": "logistic_regression",
    "random_forest": "random_forest",
}


@dataclass
class TextTrainConfig:
    feature_kind: str = "count"
    min_count: int = 2
    train_fraction: float = 0.8
    seed: int = 0
    alpha: float = 1.0
    linear: LinearHyper = field(default_factory=LinearHyper)
    forest: ForestHyper = field(default_factory=ForestHyper)


def train_text_bundle(
    records: Sequence[LabeledText], config: TextTrainConfig = TextTrainConfig()
) -> tuple[TextModelBundle, ModelSelection]:
    """Train all four classifiers and bundle the selected one."""
    train_recs, val_recs = split_dataset(
        list(records), SplitSpec(config.train_fraction, config.seed)
    )
    train_docs = [prepare_text(r.content) for r in train_recs]
    val_docs = [prepare_text(r.content) for r in val_recs]
    vocab = build_vocabulary(train_docs, min_count=config.min_count)
    idf = fit_idf(train_docs, vocab) if config.feature_kind == "tfidf" else None
    X_train = vectorize_corpus(train_docs, vocab, config.feature_kind, idf)
    X_val = vectorize_corpus(val_docs, vocab, config.feature_kind, idf)
    y_train = [r.label for r in train_recs]
    y_val = [r.label for r in val_recs]

    linear_hyper = LinearHyper(
        learning_rate=config.linear.learning_rate,
        epochs=config.linear.epochs,
        l2_lambda=config.linear.l2_lambda,
        seed=config.seed,
        batch_size=config.linear.batch_size,
    )
    forest_hyper = ForestHyper(
        n_trees=config.forest.n_trees,
        max_depth=config.forest.max_depth,
        min_leaf=config.forest.min_leaf,
        feature_subsample=config.forest.feature_subsample,
        bootstrap=config.forest.bootstrap,
        seed=config.seed,
    )
    log.info("training on %d docs, validating on %d, V=%d", len(X_train), len(X_val), len(vocab))
    models = [
        ("naive_bayes", train_naive_bayes(X_train, y_train, alpha=config.alpha)),
        ("linear_svm", train_linear_svm(X_train, y_train, hyper=linear_hyper)),
        ("logistic_regression", train_logistic(X_train, y_train, hyper=linear_hyper)),
        ("random_forest", train_random_forest(X_train, y_train, hyper=forest_hyper)),
    ]
    selection = select_best(models, X_val, y_val)
    chosen_model = dict(models)[selection.chosen]
    bundle = TextModelBundle(
        vocabulary=vocab,
        feature_kind=config.feature_kind,
        model_kind=selection.chosen,
        model=chosen_model,
        selection=selection,
        idf=idf,
    )
    return bundle, selection
