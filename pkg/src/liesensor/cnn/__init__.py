"""Small NHWC tensor network: standard and depthwise-separable convolutions,
batch normalization, residual blocks, global average pooling, SGD training
with augmentation, and binary weight files."""

from liesensor.cnn.layers import (
    BatchNorm,
    Conv2D,
    GlobalAvgPool,
    ReLU,
    ResidualBlock,
    SepConv2D,
)
from liesensor.cnn.network import (
    Network,
    build_emotion_net,
    build_network,
    softmax_cross_entropy,
)
from liesensor.cnn.training import (
    AugmentConfig,
    EpochStats,
    TrainConfig,
    TrainHistory,
    augment,
    evaluate_network,
    hflip_image,
    images_to_tensor,
    predict_face,
    train,
)
from liesensor.cnn.weights_io import load_weights, load_weights_into, save_weights

__all__ = [
    "Conv2D",
    "SepConv2D",
    "BatchNorm",
    "ReLU",
    "GlobalAvgPool",
    "ResidualBlock",
    "Network",
    "build_network",
    "build_emotion_net",
    "softmax_cross_entropy",
    "TrainConfig",
    "AugmentConfig",
    "TrainHistory",
    "EpochStats",
    "train",
    "augment",
    "hflip_image",
    "images_to_tensor",
    "evaluate_network",
    "predict_face",
    "save_weights",
    "load_weights",
    "load_weights_into",
]
