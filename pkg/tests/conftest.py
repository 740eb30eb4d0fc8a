"""Shared fixtures: sparse-vector helpers and the trained end-to-end models
(text bundle, patch-memorization network, demo cascade) built once per
session."""

from __future__ import annotations

import numpy as np
import pytest

from liesensor.cnn.network import build_emotion_net
from liesensor.cnn.training import AugmentConfig, TrainConfig, augment, train
from liesensor.features import SparseVector
from liesensor.labels import ALL_LABELS, EmotionLabel
from liesensor.synthetic import demo_cascade, emotion_patch, tiny_text_corpus
from liesensor.textclf.pipeline import TextTrainConfig, train_text_bundle
from liesensor.vision.image import scale_pixels


def make_sparse(dim: int, pairs) -> SparseVector:
    pairs = sorted(pairs)
    idx = np.array([p[0] for p in pairs], dtype=np.int64)
    val = np.array([p[1] for p in pairs], dtype=np.float64)
    return SparseVector(dim, idx, val)


@pytest.fixture(scope="session")
def fixture_bundle():
    """Text bundle trained on the handcrafted message corpus."""
    bundle, _ = train_text_bundle(
        tiny_text_corpus(), TextTrainConfig(train_fraction=0.75, min_count=2, seed=5)
    )
    return bundle


@pytest.fixture(scope="session")
def fixture_network():
    """Network that classifies the four demo patches, trained with jitter so
    detector-crop offsets do not matter."""
    rng = np.random.default_rng(42)
    aug = AugmentConfig(shift_px=3.0, zoom_pct=8.0)
    xs, ys = [], []
    for label in ALL_LABELS:
        base = scale_pixels(emotion_patch(label))
        xs.append(base)
        ys.append(int(label))
        for _ in range(30):
            xs.append(augment(base, aug, rng))
            ys.append(int(label))
    x = np.stack(xs)
    y = np.array(ys)
    net = build_emotion_net(
        width_multiplier=0.25, l2_lambda=0.0, seed=7, block_widths=(16, 32), bn_momentum=0.9
    )
    net, history = train(
        net, x, y, TrainConfig(epochs=25, batch_size=16, learning_rate=0.05, momentum=0.9, seed=7)
    )
    assert not history.diverged
    return net


@pytest.fixture(scope="session")
def fixture_cascade():
    return demo_cascade()
