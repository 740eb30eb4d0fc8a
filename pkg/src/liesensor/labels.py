"""The 4-way emotion label space shared by both prediction channels."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class EmotionLabel(enum.IntEnum):
    """Closed 4-way emotion enumeration.

    The integer values are the stable encoding used in every serialized
    artifact (model bundles, weight files, service payloads).
    """

    HAPPINESS = 0
    SADNESS = 1
    SURPRISE = 2
    HATE = 3


_DISPLAY = {
    EmotionLabel.HAPPINESS: "Happiness",
    EmotionLabel.SADNESS: "Sadness",
    EmotionLabel.SURPRISE: "Surprise",
    EmotionLabel.HATE: "Hate",
}

_BY_NAME = {name.lower(): label for label, name in _DISPLAY.items()}

ALL_LABELS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)


def label_name(label: EmotionLabel) -> str:
    """Display name, e.g. ``Happiness``."""
    return _DISPLAY[EmotionLabel(label)]


def parse_label(name: str) -> EmotionLabel:
    """Inverse of :func:`label_name`; case-insensitive. Raises ValueError."""
    try:
        return _BY_NAME[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown emotion label {name!r}") from None


@dataclass(frozen=True)
class EmotionPrediction:
    """A predicted label with per-class scores.

    ``scores`` maps each of the model's classes to a probability; values sum
    to 1 and ``label`` is the argmax, ties broken by lowest label value.
    """

    label: EmotionLabel
    scores: dict[EmotionLabel, float]

    def score_of(self, label: EmotionLabel) -> float:
        return self.scores[label]


def argmax_label(classes, scores) -> EmotionLabel:
    """Argmax with the lowest-label-value tie break.

    ``classes`` is a sequence of EmotionLabel, ``scores`` a parallel sequence
    of floats.
    """
    best = None
    best_score = None
    for cls, score in zip(classes, scores):
        if best is None or score > best_score or (score == best_score and cls < best):
            best, best_score = cls, score
    if best is None:
        raise ValueError("empty class list")
    return best


def make_prediction(classes, scores) -> EmotionPrediction:
    """Build an EmotionPrediction from parallel class/score sequences."""
    pairs = sorted(zip(classes, scores), key=lambda p: int(p[0]))
    label = argmax_label([p[0] for p in pairs], [p[1] for p in pairs])
    return EmotionPrediction(label=label, scores={c: float(s) for c, s in pairs})
