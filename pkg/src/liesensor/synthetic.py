"""Deterministic synthetic corpora and demo assets.

Everything here is seeded and reproducible: a keyword-based 4-class text
corpus, a pattern-based 4-class image corpus in the face-CSV layout, four
structured demo face patches with a center-surround demo cascade that
detects them, and a small handcrafted message corpus for end-to-end
fixtures.
"""

from __future__ import annotations

import numpy as np

from liesensor.corpus import LabeledImage, LabeledText
from liesensor.labels import ALL_LABELS, EmotionLabel
from liesensor.vision.cascade import Cascade, HaarRect, Stage, WeakClassifier

CLASS_KEYWORDS: dict[EmotionLabel, tuple[str, ...]] = {
    EmotionLabel.HAPPINESS: ("happy", "joy", "smile", "love", "great", "awesome"),
    EmotionLabel.SADNESS: ("sad", "cry", "tears", "lonely", "miss", "hurt"),
    EmotionLabel.SURPRISE: ("wow", "omg", "unexpected", "shocked", "sudden", "twist"),
    EmotionLabel.HATE: ("hate", "angry", "furious", "rage", "annoyed", "worst"),
}

NOISE_WORDS = (
    "today", "weather", "meeting", "coffee", "monday", "train", "phone", "lunch",
    "street", "window", "music", "book", "game", "movie", "night", "morning",
    "house", "water", "paper", "computer", "friend", "city", "store", "road",
    "table", "clock", "garden", "letter", "photo", "shoes", "jacket", "random",
    "video", "ticket", "bridge", "camera", "bottle", "chair", "plant", "signal",
)


def _stretch_doubles(word: str, rng: np.random.Generator) -> str:
    """Occasionally stretch an existing double letter so the repeated-letter
    collapse has real work to do without changing the collapsed token."""
    for i in range(len(word) - 1):
        if word[i] == word[i + 1]:
            extra = int(rng.integers(1, 4))
            return word[: i + 2] + word[i] * extra + word[i + 2 :]
    return word


def make_text_corpus(n_docs: int = 2000, seed: int = 1234) -> list[LabeledText]:
    """Balanced 4-class corpus: class-indicative keywords plus shared noise."""
    rng = np.random.default_rng(seed)
    labels = list(ALL_LABELS)
    records: list[LabeledText] = []
    for i in range(n_docs):
        label = labels[i % len(labels)]
        n_tokens = int(rng.integers(6, 13))
        tokens = []
        for _ in range(n_tokens):
            roll = rng.random()
            if roll < 0.5:
                word = str(rng.choice(CLASS_KEYWORDS[label]))
            elif roll < 0.58:
                other = labels[int(rng.integers(0, len(labels)))]
                word = str(rng.choice(CLASS_KEYWORDS[other]))
            else:
                word = str(rng.choice(NOISE_WORDS))
            if rng.random() < 0.05:
                word = _stretch_doubles(word, rng)
            tokens.append(word)
        records.append(
            LabeledText(id=f"syn{i:05d}", author=None, content=" ".join(tokens), label=label)
        )
    return records


def _image_pattern(label: EmotionLabel) -> np.ndarray:
    """Class-distinctive 48x48 base pattern in [0, 1]."""
    base = np.zeros((48, 48))
    yy, xx = np.mgrid[0:48, 0:48]
    if label == EmotionLabel.HAPPINESS:
        base[((yy - 24) ** 2 + (xx - 24) ** 2) <= 14 ** 2] = 1.0
    elif label == EmotionLabel.SADNESS:
        base[30:41, :] = 1.0
    elif label == EmotionLabel.SURPRISE:
        base[:, (xx[0] // 6) % 2 == 0] = 1.0
    else:  # HATE: diagonal gradient
        base = (yy + xx) / 94.0
    return base


def make_fer_corpus(n_images: int = 2000, seed: int = 99) -> list[LabeledImage]:
    """Balanced 4-class image corpus: per-class patterns + noise + brightness jitter."""
    rng = np.random.default_rng(seed)
    labels = list(ALL_LABELS)
    patterns = {label: _image_pattern(label) for label in labels}
    records: list[LabeledImage] = []
    for i in range(n_images):
        label = labels[i % len(labels)]
        brightness = rng.uniform(-20, 20)
        img = 60.0 + 120.0 * patterns[label] + brightness
        img = img + rng.uniform(-30, 30, size=(48, 48))
        records.append(
            LabeledImage(np.clip(np.rint(img), 0, 255).astype(np.uint8), label)
        )
    return records


def fer_corpus_csv(records: list[LabeledImage]) -> str:
    """Render labeled images in the two-column face-CSV layout."""
    from liesensor.corpus import FER_CODE_NAMES, map_fer_label

    label_to_code = {}
    for code in FER_CODE_NAMES:
        mapped = map_fer_label(code)
        if mapped is not None:
            label_to_code[mapped] = code
    lines = ["emotion,pixels"]
    for rec in records:
        pixels = " ".join(str(int(v)) for v in rec.pixels.ravel())
        lines.append(f'{label_to_code[rec.label]},"{pixels}"')
    return "\n".join(lines) + "\n"


# --- demo face patches + cascade ---------------------------------------

PATCH_SURROUND = 40
PATCH_CENTER = 200


def emotion_patch(label: EmotionLabel) -> np.ndarray:
    """A 48x48 'face': bright structured 24x24 center on a dim surround.

    All four share the center-surround mass (one cascade detects them all)
    but differ in center texture (the network tells them apart).
    """
    patch = np.full((48, 48), PATCH_SURROUND, dtype=np.uint8)
    center = np.full((24, 24), PATCH_CENTER, dtype=np.uint8)
    hi, lo = 235, 140
    if label == EmotionLabel.SADNESS:  # vertical stripes
        for j in range(0, 24, 8):
            center[:, j : j + 4] = hi
            center[:, j + 4 : j + 8] = lo
    elif label == EmotionLabel.SURPRISE:  # horizontal stripes
        for i in range(0, 24, 8):
            center[i : i + 4, :] = hi
            center[i + 4 : i + 8, :] = lo
    elif label == EmotionLabel.HATE:  # checkerboard
        for i in range(0, 24, 8):
            for j in range(0, 24, 8):
                center[i : i + 8, j : j + 8] = hi if ((i + j) // 8) % 2 == 0 else lo
    patch[12:36, 12:36] = center
    return patch


def scene_with_patch(label: EmotionLabel, size: int = 96, origin: tuple[int, int] = (24, 24)) -> np.ndarray:
    """A dark scene with the emotion patch placed at ``origin`` (y, x)."""
    img = np.zeros((size, size), dtype=np.uint8)
    oy, ox = origin
    img[oy : oy + 48, ox : ox + 48] = emotion_patch(label)
    return img


def demo_cascade() -> Cascade:
    """One center-surround stage over a 48x48 window, tuned to fire on the
    demo patches and their immediate neighborhood only."""
    weak = WeakClassifier(
        rects=(HaarRect(0, 0, 48, 48, -1.0), HaarRect(12, 12, 24, 24, 4.0)),
        node_threshold=1.5,
        left_val=0.0,
        right_val=1.0,
    )
    return Cascade(window_w=48, window_h=48, stages=(Stage(stage_threshold=0.5, weaks=(weak,)),))


# --- handcrafted message corpus -----------------------------------------

_FIXTURE_MESSAGES: dict[EmotionLabel, tuple[str, ...]] = {
    EmotionLabel.HAPPINESS: (
        "best day ever so happy",
        "i love this happy feeling",
        "great news made me smile",
        "so happy and full of joy",
        "what a great awesome day",
        "smile and joy everywhere today",
        "feeling happy and grateful",
        "love the great vibes today",
    ),
    EmotionLabel.SADNESS: (
        "i feel so sad today",
        "crying alone tears everywhere",
        "i miss you and feel lonely",
        "such a sad and hurt feeling",
        "lost my wallet feeling sad",
        "tears and more tears tonight",
        "so lonely and so sad",
        "hurt and sad after that call",
    ),
    EmotionLabel.SURPRISE: (
        "wow i did not expect that",
        "omg what a shocking twist",
        "totally shocked by the sudden news",
        "wow omg that was unexpected",
        "such a sudden surprise wow",
        "shocked me with that twist",
        "omg wow completely unexpected",
        "the sudden twist shocked everyone",
    ),
    EmotionLabel.HATE: (
        "i hate this so much",
        "angry and furious right now",
        "this is the worst thing ever",
        "full of rage and hate",
        "so annoyed and angry today",
        "furious about the worst service",
        "hate hate hate this rage",
        "annoyed beyond words the worst",
    ),
}


def tiny_text_corpus() -> list[LabeledText]:
    """A small fixed message corpus for end-to-end fixtures."""
    records = []
    i = 0
    for label, messages in _FIXTURE_MESSAGES.items():
        for msg in messages:
            records.append(LabeledText(id=f"fix{i:03d}", author=None, content=msg, label=label))
            i += 1
    return records
