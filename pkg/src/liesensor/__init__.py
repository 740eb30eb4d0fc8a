"""Two-channel emotion verification.

A message is predicted to carry an emotion twice, independently: once from
its text and once from a face snapshot taken while it was written. Equal
labels license the message as Honest; contradicting labels flag it as Liar.
"""

from liesensor.labels import EmotionLabel, EmotionPrediction, label_name, parse_label
from liesensor.errors import (
    LieSensorError,
    DataFormatError,
    ChecksumError,
    CascadeFormatError,
)

__all__ = [
    "EmotionLabel",
    "EmotionPrediction",
    "label_name",
    "parse_label",
    "LieSensorError",
    "DataFormatError",
    "ChecksumError",
    "CascadeFormatError",
]

__version__ = "0.1.0"
