"""Network assembly: forward/backward orchestration, the softmax
cross-entropy head, and architecture descriptors for reconstruction."""

from __future__ import annotations

import numpy as np

from liesensor.cnn.layers import (
    BatchNorm,
    Conv2D,
    GlobalAvgPool,
    Layer,
    ReLU,
    ResidualBlock,
    SepConv2D,
)
from liesensor.errors import DataFormatError, TrainingDivergedError


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and the softmax probabilities.

    Max-subtracted for stability; labels are class indices (N,).
    """
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    picked = np.clip(probs[np.arange(n), labels], 1e-300, None)
    return float(-np.mean(np.log(picked))), probs


class Network:
    """An ordered layer stack ending in (batch, classes) logits."""

    def __init__(self, layers: list[Layer], class_count: int = 4, input_shape=(48, 48, 1)):
        self.layers = layers
        self.class_count = class_count
        self.input_shape = tuple(input_shape)

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        out = np.asarray(x, dtype=np.float64)
        for i, layer in enumerate(self.layers):
            try:
                out = layer.forward(out, training)
            except ValueError as exc:
                raise ValueError(f"layer {i} ({type(layer).__name__}): {exc}") from exc
        return out

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logits = self.forward(x, training=False)
        shifted = logits - logits.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        return exp / exp.sum(axis=1, keepdims=True)

    def named_params(self):
        """(key, layer, name) in a stable order; keys are 'layer{i}.{name}'."""
        for i, layer in enumerate(self.layers):
            for name in layer.params():
                yield f"layer{i}.{name}", layer, name

    def named_trainables(self):
        for i, layer in enumerate(self.layers):
            for name in layer.trainable_names():
                yield f"layer{i}.{name}", layer, name

    def regularization_loss(self) -> float:
        total = 0.0
        for layer in self.layers:
            for lam, _, arr in layer.kernel_terms():
                if lam:
                    total += lam * float(np.sum(arr.astype(np.float64) ** 2))
        return total

    def compute_loss(self, x: np.ndarray, labels: np.ndarray, training: bool = True):
        """(total loss, probabilities); total = data loss + kernel penalties."""
        logits = self.forward(x, training)
        data_loss, probs = softmax_cross_entropy(logits, labels)
        return data_loss + self.regularization_loss(), probs

    def backward_from_probs(self, probs: np.ndarray, labels: np.ndarray) -> dict[str, np.ndarray]:
        """Backpropagate the loss gradient; returns gradients keyed like
        named_trainables(), kernel-penalty terms included."""
        n = probs.shape[0]
        grad = probs.copy()
        grad[np.arange(n), labels] -= 1.0
        grad /= n
        for i in reversed(range(len(self.layers))):
            layer = self.layers[i]
            grad = layer.backward(grad)
            if not np.all(np.isfinite(grad)):
                raise TrainingDivergedError(
                    f"non-finite gradient flowing out of layer {i} ({type(layer).__name__})"
                )
        grads: dict[str, np.ndarray] = {}
        for key, layer, name in self.named_trainables():
            if name in layer.grads:
                grads[key] = layer.grads[name]
        for i, layer in enumerate(self.layers):
            for lam, pname, arr in layer.kernel_terms():
                if lam:
                    key = f"layer{i}.{pname}"
                    grads[key] = grads[key] + 2.0 * lam * arr.astype(np.float64)
        return grads

    def set_l2(self, l2_lambda: float) -> None:
        for layer in self.layers:
            layer.set_l2(l2_lambda)

    def descriptor(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "class_count": self.class_count,
            "layers": [layer.descriptor() for layer in self.layers],
        }


def _layer_from_descriptor(desc: dict, rng=None) -> Layer:
    kind = desc.get("type")
    if kind == "conv":
        return Conv2D(
            desc["in_channels"], desc["out_channels"], desc["kernel_size"],
            stride=desc.get("stride", 1), padding=desc.get("padding", "same"),
            l2_lambda=desc.get("l2_lambda", 0.0), rng=rng,
        )
    if kind == "sepconv":
        return SepConv2D(
            desc["in_channels"], desc["out_channels"], desc["kernel_size"],
            stride=desc.get("stride", 1), padding=desc.get("padding", "same"),
            l2_lambda=desc.get("l2_lambda", 0.0), rng=rng,
        )
    if kind == "batchnorm":
        return BatchNorm(
            desc["channels"], momentum=desc.get("momentum", 0.99),
            epsilon=desc.get("epsilon", 1e-5),
        )
    if kind == "relu":
        return ReLU()
    if kind == "global_avg_pool":
        return GlobalAvgPool()
    if kind == "residual":
        return ResidualBlock(
            main=[_layer_from_descriptor(d, rng) for d in desc["main"]],
            skip=[_layer_from_descriptor(d, rng) for d in desc["skip"]],
        )
    raise DataFormatError(f"unknown layer type {kind!r} in architecture descriptor")


def build_network(descriptor: dict, rng=None) -> Network:
    """Instantiate a network from a descriptor (zero weights unless rng given)."""
    layers = [_layer_from_descriptor(d, rng) for d in descriptor["layers"]]
    return Network(
        layers,
        class_count=int(descriptor.get("class_count", 4)),
        input_shape=tuple(descriptor.get("input_shape", (48, 48, 1))),
    )


def emotion_net_descriptor(
    width_multiplier: float = 0.5,
    class_count: int = 4,
    l2_lambda: float = 1e-4,
    block_widths: tuple[int, ...] = (16, 32, 64, 128),
    entry_width: int = 8,
    bn_momentum: float = 0.99,
) -> dict:
    """Reduced separable-convolution architecture descriptor.

    Two valid 3x3 entry convolutions, then one stride-2 residual block per
    entry of ``block_widths`` (widths scaled by ``width_multiplier``), then a
    3x3 head convolution to ``class_count`` channels and global average
    pooling.
    """

    def scaled(w: int) -> int:
        return max(2, int(round(w * width_multiplier)))

    layers: list[dict] = []
    entry = scaled(entry_width)
    layers.append({"type": "conv", "in_channels": 1, "out_channels": entry,
                   "kernel_size": 3, "stride": 1, "padding": "valid", "l2_lambda": l2_lambda})
    layers.append({"type": "batchnorm", "channels": entry, "momentum": bn_momentum})
    layers.append({"type": "relu"})
    layers.append({"type": "conv", "in_channels": entry, "out_channels": entry,
                   "kernel_size": 3, "stride": 1, "padding": "valid", "l2_lambda": l2_lambda})
    layers.append({"type": "batchnorm", "channels": entry, "momentum": bn_momentum})
    layers.append({"type": "relu"})
    previous = entry
    for width in block_widths:
        w = scaled(width)
        layers.append({
            "type": "residual",
            "main": [
                {"type": "sepconv", "in_channels": previous, "out_channels": w,
                 "kernel_size": 3, "stride": 1, "padding": "same", "l2_lambda": l2_lambda},
                {"type": "batchnorm", "channels": w, "momentum": bn_momentum},
                {"type": "relu"},
                {"type": "sepconv", "in_channels": w, "out_channels": w,
                 "kernel_size": 3, "stride": 2, "padding": "same", "l2_lambda": l2_lambda},
                {"type": "batchnorm", "channels": w, "momentum": bn_momentum},
            ],
            "skip": [
                {"type": "conv", "in_channels": previous, "out_channels": w,
                 "kernel_size": 1, "stride": 2, "padding": "same", "l2_lambda": l2_lambda},
                {"type": "batchnorm", "channels": w, "momentum": bn_momentum},
            ],
        })
        previous = w
    layers.append({"type": "conv", "in_channels": previous, "out_channels": class_count,
                   "kernel_size": 3, "stride": 1, "padding": "same", "l2_lambda": l2_lambda})
    layers.append({"type": "global_avg_pool"})
    return {"input_shape": [48, 48, 1], "class_count": class_count, "layers": layers}


def build_emotion_net(
    width_multiplier: float = 0.5,
    class_count: int = 4,
    l2_lambda: float = 1e-4,
    seed: int = 0,
    block_widths: tuple[int, ...] = (16, 32, 64, 128),
    bn_momentum: float = 0.99,
) -> Network:
    descriptor = emotion_net_descriptor(
        width_multiplier=width_multiplier,
        class_count=class_count,
        l2_lambda=l2_lambda,
        block_widths=block_widths,
        bn_momentum=bn_momentum,
    )
    rng = np.random.default_rng(seed)
    return build_network(descriptor, rng=rng)
