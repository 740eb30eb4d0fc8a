"""Dataset ingestion: face-image CSV and tweet CSV loading, label mapping,
deterministic stratified splits.

Both loaders map raw labels into the 4-way emotion space and silently drop
rows with labels outside it, counting the drops in a load report. Malformed
rows become record-level errors; structural file problems raise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from liesensor.errors import DataFormatError
from liesensor.labels import ALL_LABELS, EmotionLabel, parse_label

IMAGE_SIDE = 48
PIXELS_PER_IMAGE = IMAGE_SIDE * IMAGE_SIDE

# Public face-CSV numeric code order: 0=Angry 1=Disgust 2=Fear 3=Happy
# 4=Sad 5=Surprise 6=Neutral. Angry maps to Hate; 1, 2 and 6 are dropped.
FER_CODE_NAMES = {
    0: "angry",
    1: "disgust",
    2: "fear",
    3: "happy",
    4: "sad",
    5: "surprise",
    6: "neutral",
}

_FER_CODE_TO_LABEL: dict[int, Optional[EmotionLabel]] = {
    0: EmotionLabel.HATE,
    1: None,
    2: None,
    3: EmotionLabel.HAPPINESS,
    4: EmotionLabel.SADNESS,
    5: EmotionLabel.SURPRISE,
    6: None,
}

# Frozen 13-way sentiment reduction, grouped by valence family. Overridable
# via a mapping file (see load_label_mapping).
DEFAULT_TEXT_LABEL_MAP: dict[str, Optional[EmotionLabel]] = {
    "happiness": EmotionLabel.HAPPINESS,
    "fun": EmotionLabel.HAPPINESS,
    "enthusiasm": EmotionLabel.HAPPINESS,
    "love": EmotionLabel.HAPPINESS,
    "relief": EmotionLabel.HAPPINESS,
    "sadness": EmotionLabel.SADNESS,
    "worry": EmotionLabel.SADNESS,
    "surprise": EmotionLabel.SURPRISE,
    "hate": EmotionLabel.HATE,
    "anger": EmotionLabel.HATE,
    "neutral": None,
    "empty": None,
    "boredom": None,
}


@dataclass
class LabeledImage:
    """A 48x48 grayscale face image with its emotion label."""

    pixels: np.ndarray  # uint8, shape (48, 48)
    label: EmotionLabel

    def __post_init__(self):
        if self.pixels.size != PIXELS_PER_IMAGE:
            raise ValueError(f"pixel count {self.pixels.size} != {PIXELS_PER_IMAGE}")
        self.pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(IMAGE_SIDE, IMAGE_SIDE)


@dataclass
class LabeledText:
    """A raw message with its emotion label."""

    id: str
    author: Optional[str]
    content: str
    label: EmotionLabel


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int


@dataclass
class LoadReport:
    """Per-file ingestion summary: kept + dropped + errors = data rows."""

    kept: int = 0
    dropped_by_label: dict[str, int] = field(default_factory=dict)
    dropped_empty: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def dropped(self) -> int:
        return sum(self.dropped_by_label.values()) + self.dropped_empty

    @property
    def total(self) -> int:
        return self.kept + self.dropped + len(self.errors)

    def _drop(self, raw_label: str) -> None:
        self.dropped_by_label[raw_label] = self.dropped_by_label.get(raw_label, 0) + 1

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "dropped_by_label": dict(self.dropped_by_label),
            "dropped_empty": self.dropped_empty,
            "errors": [{"row": row, "reason": reason} for row, reason in self.errors],
        }


def map_fer_label(code: int) -> Optional[EmotionLabel]:
    """Map a face-CSV numeric emotion code to the 4-way space.

    Returns None for the dropped codes (disgust, fear, neutral); raises for
    codes outside 0..6.
    """
    if code not in _FER_CODE_TO_LABEL:
        raise ValueError(f"emotion code {code} outside 0-6")
    return _FER_CODE_TO_LABEL[code]


def map_text_label(
    raw: str, mapping: Optional[dict[str, Optional[EmotionLabel]]] = None
) -> Optional[EmotionLabel]:
    """Map a raw sentiment name to the 4-way space; unmapped names give None."""
    table = DEFAULT_TEXT_LABEL_MAP if mapping is None else mapping
    return table.get(raw.strip().lower())


def load_label_mapping(path) -> dict[str, Optional[EmotionLabel]]:
    """Parse a mapping override file: one ``raw_name = Label|drop`` per line.

    ``#`` starts a comment; blank lines are ignored.
    """
    mapping: dict[str, Optional[EmotionLabel]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataFormatError(f"mapping line {lineno}: missing '=' in {line!r}")
            raw, target = (part.strip() for part in line.split("=", 1))
            if not raw:
                raise DataFormatError(f"mapping line {lineno}: empty raw name")
            if target.lower() == "drop":
                mapping[raw.lower()] = None
            else:
                try:
                    mapping[raw.lower()] = parse_label(target)
                except ValueError as exc:
                    raise DataFormatError(f"mapping line {lineno}: {exc}") from None
    return mapping


def _open_csv(path, required: Sequence[str]) -> tuple[list[dict], list[str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DataFormatError(f"{path}: empty file, no header row")
            fields = [f.strip() for f in reader.fieldnames]
            missing = [c for c in required if c not in fields]
            if missing:
                raise DataFormatError(f"{path}: missing required column(s) {missing}")
            rows = list(reader)
    except (OSError, csv.Error) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    return rows, fields


def load_fer_csv(path) -> tuple[list[LabeledImage], LoadReport]:
    """Load a face-image CSV (``emotion,pixels`` header, extra columns ignored).

    Each kept row yields a LabeledImage; rows with dropped labels are counted
    by raw label name, malformed rows become record errors.
    """
    rows, _ = _open_csv(path, required=["emotion", "pixels"])
    images: list[LabeledImage] = []
    report = LoadReport()
    for rowno, row in enumerate(rows, start=1):
        raw_code = (row.get("emotion") or "").strip()
        try:
            code = int(raw_code)
        except ValueError:
            report.errors.append((rowno, f"non-numeric emotion code {raw_code!r}"))
            continue
        if code not in FER_CODE_NAMES:
            report.errors.append((rowno, f"emotion code {code} outside 0-6"))
            continue
        label = map_fer_label(code)
        if label is None:
            report._drop(FER_CODE_NAMES[code])
            continue
        tokens = (row.get("pixels") or "").split()
        if len(tokens) != PIXELS_PER_IMAGE:
            report.errors.append(
                (rowno, f"pixel count {len(tokens)} != {PIXELS_PER_IMAGE}")
            )
            continue
        try:
            values = np.array(tokens, dtype=np.int64)
        except ValueError:
            report.errors.append((rowno, "non-numeric pixel token"))
            continue
        if values.min() < 0 or values.max() > 255:
            report.errors.append((rowno, "pixel value outside 0-255"))
            continue
        images.append(LabeledImage(values.astype(np.uint8), label))
        report.kept += 1
    return images, report


def load_tweet_csv(
    path, mapping: Optional[dict[str, Optional[EmotionLabel]]] = None
) -> tuple[list[LabeledText], LoadReport]:
    """Load a tweet CSV (``tweet_id,sentiment,author,content``, any column order)."""
    rows, _ = _open_csv(path, required=["tweet_id", "sentiment", "author", "content"])
    texts: list[LabeledText] = []
    report = LoadReport()
    for rowno, row in enumerate(rows, start=1):
        sentiment = (row.get("sentiment") or "").strip().lower()
        if not sentiment:
            report.errors.append((rowno, "missing sentiment"))
            continue
        label = map_text_label(sentiment, mapping)
        if label is None:
            report._drop(sentiment)
            continue
        content = (row.get("content") or "").strip()
        if not content:
            report.dropped_empty += 1
            continue
        texts.append(
            LabeledText(
                id=(row.get("tweet_id") or "").strip(),
                author=(row.get("author") or "").strip() or None,
                content=content,
                label=label,
            )
        )
        report.kept += 1
    return texts, report


def split_dataset(records: list, spec: SplitSpec) -> tuple[list, list]:
    """Deterministic stratified train/validation partition.

    Pure in (records order, spec): each label's records are permuted with the
    seeded generator and split so its train share stays within one record of
    the global fraction, with at least one record on each side.
    """
    if not records:
        raise ValueError("cannot split an empty record list")
    if not 0.0 < spec.train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0,1), got {spec.train_fraction}")
    by_label: dict[int, list[int]] = {}
    for i, rec in enumerate(records):
        by_label.setdefault(int(rec.label), []).append(i)
    for lbl, idxs in by_label.items():
        if len(idxs) < 2:
            raise ValueError(
                f"cannot stratify: label {EmotionLabel(lbl).name} has {len(idxs)} record(s)"
            )
    rng = np.random.default_rng(spec.seed)
    train_idx: list[int] = []
    val_idx: list[int] = []
    for lbl in sorted(by_label):
        idxs = by_label[lbl]
        n = len(idxs)
        n_train = int(round(spec.train_fraction * n))
        n_train = min(max(n_train, 1), n - 1)
        order = rng.permutation(n)
        train_idx.extend(idxs[j] for j in order[:n_train])
        val_idx.extend(idxs[j] for j in order[n_train:])
    train_idx.sort()
    val_idx.sort()
    return [records[i] for i in train_idx], [records[i] for i in val_idx]


def label_array(records: Sequence) -> np.ndarray:
    """Labels of a record list as an int64 vector."""
    return np.array([int(r.label) for r in records], dtype=np.int64)


def label_counts(records: Sequence) -> dict[EmotionLabel, int]:
    counts = {lbl: 0 for lbl in ALL_LABELS}
    for rec in records:
        counts[EmotionLabel(int(rec.label))] += 1
    return counts
