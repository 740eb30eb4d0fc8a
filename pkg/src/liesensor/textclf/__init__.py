"""Four probability classifiers for text emotion prediction, model selection
and the trained-model bundle format."""

from liesensor.textclf.naive_bayes import NaiveBayesModel, train_naive_bayes
from liesensor.textclf.linear import (
    LinearHyper,
    LinearModel,
    train_linear_svm,
    train_logistic,
)
from liesensor.textclf.forest import (
    DecisionTree,
    ForestHyper,
    RandomForestModel,
    train_decision_tree,
    train_random_forest,
)
from liesensor.textclf.predict import ModelSelection, accuracy, predict_text, select_best
from liesensor.textclf.bundle import TextModelBundle, load_bundle, save_bundle
from liesensor.textclf.pipeline import TextTrainConfig, train_text_bundle

__all__ = [
    "NaiveBayesModel",
    "train_naive_bayes",
    "LinearHyper",
    "LinearModel",
    "train_logistic",
    "train_linear_svm",
    "ForestHyper",
    "DecisionTree",
    "RandomForestModel",
    "train_decision_tree",
    "train_random_forest",
    "ModelSelection",
    "accuracy",
    "predict_text",
    "select_best",
    "TextModelBundle",
    "save_bundle",
    "load_bundle",
    "TextTrainConfig",
    "train_text_bundle",
]
