"""SGD-with-momentum training, image augmentation and face prediction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from liesensor.cnn.network import Network, softmax_cross_entropy
from liesensor.corpus import LabeledImage
from liesensor.labels import ALL_LABELS, EmotionPrediction, make_prediction
from liesensor.vision.image import sample_bilinear, scale_pixels

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AugmentConfig:
    shift_px: float = 0.0
    rotate_deg: float = 0.0
    hflip: bool = False
    zoom_pct: float = 0.0
    shear_deg: float = 0.0  # available, off by default

    @property
    def active(self) -> bool:
        return bool(
            self.hflip or self.shift_px or self.rotate_deg or self.zoom_pct or self.shear_deg
        )

    def validate(self) -> None:
        for name in ("shift_px", "rotate_deg", "zoom_pct", "shear_deg"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9
    l2_lambda: Optional[float] = None  # None keeps the layers' own values
    seed: int = 0
    augmentation: AugmentConfig = field(default_factory=AugmentConfig)

    def validate(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.momentum < 0:
            raise ValueError("momentum must be >= 0")
        self.augmentation.validate()


@dataclass
class EpochStats:
    epoch: int
    loss: float
    val_accuracy: Optional[float]


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    diverged: bool = False

    def to_csv(self) -> str:
        lines = ["epoch,loss,val_accuracy"]
        for e in self.epochs:
            val = "" if e.val_accuracy is None else f"{e.val_accuracy:.6f}"
            lines.append(f"{e.epoch},{e.loss:.6f},{val}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def hflip_image(img: np.ndarray) -> np.ndarray:
    """Horizontal mirror of an (h, w, 1) tensor; exact involution."""
    return img[:, ::-1, :].copy()


def augment(img: np.ndarray, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Randomized flip/shift/rotate/zoom/shear with bilinear resampling and
    edge-replicate padding. An all-zero config is the exact identity; the
    same generator state replays the same output.
    """
    if img.ndim != 3 or img.shape[2] != 1:
        raise ValueError(f"expected (h, w, 1) input, got {img.shape}")
    if not config.active:
        return img.copy()
    out = img
    if config.hflip and rng.random() < 0.5:
        out = hflip_image(out)
    shift_x = rng.uniform(-config.shift_px, config.shift_px) if config.shift_px else 0.0
    shift_y = rng.uniform(-config.shift_px, config.shift_px) if config.shift_px else 0.0
    angle = np.deg2rad(rng.uniform(-config.rotate_deg, config.rotate_deg)) if config.rotate_deg else 0.0
    zoom = 1.0 + (rng.uniform(-config.zoom_pct, config.zoom_pct) / 100.0) if config.zoom_pct else 1.0
    shear = np.deg2rad(rng.uniform(-config.shear_deg, config.shear_deg)) if config.shear_deg else 0.0
    if shift_x == 0.0 and shift_y == 0.0 and angle == 0.0 and zoom == 1.0 and shear == 0.0:
        return out.copy() if out is img else out
    h, w, _ = out.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    cos, sin = np.cos(angle), np.sin(angle)
    # forward map: rotate, shear, zoom about the center, then shift
    fwd = np.array([[cos, -sin], [sin, cos]]) @ np.array([[1.0, np.tan(shear)], [0.0, 1.0]]) * zoom
    inv = np.linalg.inv(fwd)
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    u = xs - cx - shift_x
    v = ys - cy - shift_y
    src_x = inv[0, 0] * u + inv[0, 1] * v + cx
    src_y = inv[1, 0] * u + inv[1, 1] * v + cy
    sampled = sample_bilinear(out[:, :, 0], src_y, src_x)
    return sampled[:, :, np.newaxis]


def images_to_tensor(records: Sequence[LabeledImage]) -> tuple[np.ndarray, np.ndarray]:
    """Stack labeled images into scaled (N, 48, 48, 1) inputs + label indices."""
    if not records:
        raise ValueError("no images")
    x = np.stack([scale_pixels(r.pixels) for r in records])
    y = np.array([int(r.label) for r in records], dtype=np.int64)
    return x, y


def evaluate_network(network: Network, x: np.ndarray, y: np.ndarray, batch_size: int = 64) -> float:
    hits = 0
    for start in range(0, x.shape[0], batch_size):
        probs = network.predict_proba(x[start : start + batch_size])
        hits += int(np.sum(np.argmax(probs, axis=1) == y[start : start + batch_size]))
    return hits / x.shape[0]


def train(
    network: Network,
    x: np.ndarray,
    y: np.ndarray,
    config: TrainConfig = TrainConfig(),
    validation: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> tuple[Network, TrainHistory]:
    """Seed-deterministic SGD with momentum.

    Stops early (history flagged ``diverged``) if the loss goes non-finite;
    zero epochs leave the network untouched.
    """
    config.validate()
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    if x.shape[0] != y.shape[0]:
        raise ValueError("inputs and labels length mismatch")
    if config.l2_lambda is not None:
        network.set_l2(config.l2_lambda)
    rng = np.random.default_rng(config.seed)
    velocity = {
        key: np.zeros(layer.params()[name].shape, dtype=np.float64)
        for key, layer, name in network.named_trainables()
    }
    history = TrainHistory()
    n = x.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            xb = x[batch_idx]
            if config.augmentation.active:
                xb = np.stack([augment(sample, config.augmentation, rng) for sample in xb])
            loss, probs = network.compute_loss(xb, y[batch_idx], training=True)
            if not np.isfinite(loss):
                log.warning("training diverged at epoch %d (loss=%r)", epoch, loss)
                history.diverged = True
                return network, history
            grads = network.backward_from_probs(probs, y[batch_idx])
            for key, layer, name in network.named_trainables():
                vel = velocity[key]
                vel *= config.momentum
                vel -= config.learning_rate * grads[key]
                new_value = (layer.params()[name].astype(np.float64) + vel).astype(np.float32)
                layer.set_param(name, new_value)
            losses.append(loss)
        val_acc = None
        if validation is not None:
            val_acc = evaluate_network(network, validation[0], validation[1])
        history.epochs.append(EpochStats(epoch=epoch, loss=float(np.mean(losses)), val_accuracy=val_acc))
    return network, history


def predict_face(network: Network, patch: np.ndarray) -> EmotionPrediction:
    """Scale a 48x48 gray patch, run the network in eval mode, score labels."""
    if patch.shape != (48, 48):
        raise ValueError(f"expected a 48x48 gray patch, got {patch.shape}")
    x = scale_pixels(patch)[np.newaxis, ...]
    probs = network.predict_proba(x)[0]
    if probs.shape[0] != len(ALL_LABELS):
        raise ValueError(f"network predicts {probs.shape[0]} classes, need {len(ALL_LABELS)}")
    return make_prediction(ALL_LABELS, probs)
