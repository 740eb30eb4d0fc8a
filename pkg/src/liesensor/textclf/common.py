"""Shared helpers for the classifier trainers."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from liesensor.features import SparseVector, stack_rows
from liesensor.labels import EmotionLabel


def resolve_classes(
    y: Sequence[EmotionLabel], classes: Optional[Sequence[EmotionLabel]]
) -> tuple[EmotionLabel, ...]:
    """Class set for a trainer: inferred from y, or validated when explicit.

    Every explicitly requested class must appear in y; the production
    pipeline always passes the full 4-label space.
    """
    if len(y) == 0:
        raise ValueError("empty training set")
    present = {EmotionLabel(int(lbl)) for lbl in y}
    if classes is None:
        return tuple(sorted(present))
    classes = tuple(EmotionLabel(int(c)) for c in classes)
    missing = [c for c in classes if c not in present]
    if missing:
        raise ValueError(f"class with zero examples: {[c.name for c in missing]}")
    extra = present - set(classes)
    if extra:
        raise ValueError(f"labels outside class list: {[c.name for c in extra]}")
    return classes


def encode_labels(y: Sequence[EmotionLabel], classes: Sequence[EmotionLabel]) -> np.ndarray:
    """Labels as dense class indices 0..C-1 in the given class order."""
    pos = {int(c): i for i, c in enumerate(classes)}
    return np.array([pos[int(lbl)] for lbl in y], dtype=np.int64)


def design_matrix(X: Sequence[SparseVector]):
    """CSR stack with a consistency check against empty input."""
    if len(X) == 0:
        raise ValueError("empty training set")
    return stack_rows(X)


def check_dimension(x: SparseVector, expected: int) -> None:
    if x.dimension != expected:
        raise ValueError(f"input dimension {x.dimension} != model dimension {expected}")
