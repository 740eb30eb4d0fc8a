"""Cross-channel verdicts: compare the face-predicted and text-predicted
emotion labels and license the message as Honest or flag it as Liar.

Equality licenses; any contradiction flags. When a channel produces no
signal (no detectable face, no in-vocabulary text) the result carries no
verdict and a reason instead of a guess.
"""

from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from liesensor.cnn.network import Network
from liesensor.cnn.training import predict_face
from liesensor.labels import EmotionLabel, EmotionPrediction, label_name
from liesensor.textclf.bundle import TextModelBundle
from liesensor.textclf.predict import predict_text
from liesensor.textprep import prepare_text
from liesensor.vision.cascade import BoundingBox, Cascade, DetectParams, detect_faces, pick_face
from liesensor.vision.image import crop_face

REASON_NO_FACE = "no face"
REASON_NO_IMAGE = "no image"
REASON_NO_TEXT = "no text signal"


class Verdict(enum.Enum):
    LIAR = "Liar"
    HONEST = "Honest"


def compare_labels(face: EmotionLabel, text: EmotionLabel) -> Verdict:
    """Honest iff both channels predicted the same label."""
    return Verdict.HONEST if EmotionLabel(face) == EmotionLabel(text) else Verdict.LIAR


@dataclass
class VerificationResult:
    message_id: str
    timestamp: str
    text_prediction: Optional[EmotionPrediction]
    face_prediction: Optional[EmotionPrediction]
    face_box: Optional[BoundingBox]
    verdict: Optional[Verdict]
    reason: Optional[str] = None

    @property
    def text_label(self) -> Optional[EmotionLabel]:
        return self.text_prediction.label if self.text_prediction else None

    @property
    def face_label(self) -> Optional[EmotionLabel]:
        return self.face_prediction.label if self.face_prediction else None

    def record_line(self) -> str:
        """Single-line field=value log record."""
        parts = [f"message_id={self.message_id}", f"timestamp={self.timestamp}"]
        if self.text_prediction:
            parts.append(f"text_label={label_name(self.text_prediction.label)}")
        if self.face_prediction:
            parts.append(f"face_label={label_name(self.face_prediction.label)}")
        if self.face_box:
            b = self.face_box
            parts.append(f"face_box={b.x},{b.y},{b.w},{b.h}")
        parts.append(f"verdict={self.verdict.value if self.verdict else 'none'}")
        if self.reason:
            parts.append(f"reason={self.reason}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        def scores_dict(pred: Optional[EmotionPrediction]):
            if pred is None:
                return None
            return {label_name(lbl): score for lbl, score in pred.scores.items()}

        return {
            "message_id": self.message_id,
            "timestamp": self.timestamp,
            "text_label": label_name(self.text_prediction.label) if self.text_prediction else None,
            "text_scores": scores_dict(self.text_prediction),
            "face_label": label_name(self.face_prediction.label) if self.face_prediction else None,
            "face_scores": scores_dict(self.face_prediction),
            "face_box": (
                {"x": self.face_box.x, "y": self.face_box.y,
                 "w": self.face_box.w, "h": self.face_box.h}
                if self.face_box else None
            ),
            "verdict": self.verdict.value if self.verdict else None,
            "reason": self.reason,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def verify_message(
    text: str,
    image: Optional[np.ndarray],
    bundle: TextModelBundle,
    network: Network,
    cascade: Cascade,
    detect_params: DetectParams = DetectParams(),
    message_id: Optional[str] = None,
) -> VerificationResult:
    """Run both channels on one message event and compare their labels.

    The largest detected face feeds the network; a missing/blank image or a
    fully out-of-vocabulary text yields a no-verdict result with a reason.
    """
    reasons = []
    text_pred: Optional[EmotionPrediction] = None
    tokens = prepare_text(text)
    x = bundle.vectorize(tokens)
    if x.nnz == 0:
        reasons.append(REASON_NO_TEXT)
    else:
        text_pred = predict_text(bundle.model, x)

    face_pred: Optional[EmotionPrediction] = None
    box: Optional[BoundingBox] = None
    if image is None:
        reasons.append(REASON_NO_IMAGE)
    else:
        box = pick_face(detect_faces(image, cascade, detect_params))
        if box is None:
            reasons.append(REASON_NO_FACE)
        else:
            face_pred = predict_face(network, crop_face(image, box))

    verdict = None
    if text_pred is not None and face_pred is not None:
        verdict = compare_labels(face_pred.label, text_pred.label)
    return VerificationResult(
        message_id=message_id or uuid.uuid4().hex,
        timestamp=_now(),
        text_prediction=text_pred,
        face_prediction=face_pred,
        face_box=box,
        verdict=verdict,
        reason="; ".join(reasons) if reasons else None,
    )


@dataclass
class EvalReport:
    """Liar-as-positive confusion counts with precision and recall."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    skipped_no_verdict: int = 0

    @property
    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) > 0 else None

    @property
    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) > 0 else None

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "skipped_no_verdict": self.skipped_no_verdict,
            "precision": self.precision, "recall": self.recall,
        }


def evaluate(results: Sequence[tuple[VerificationResult, Verdict]]) -> EvalReport:
    """Score verdicts against ground truth; no-verdict results are counted
    aside, never guessed."""
    if not results:
        raise ValueError("empty result list")
    report = EvalReport()
    for result, truth in results:
        if result.verdict is None:
            report.skipped_no_verdict += 1
            continue
        predicted_liar = result.verdict is Verdict.LIAR
        actual_liar = truth is Verdict.LIAR
        if predicted_liar and actual_liar:
            report.tp += 1
        elif predicted_liar and not actual_liar:
            report.fp += 1
        elif not predicted_liar and actual_liar:
            report.fn += 1
        else:
            report.tn += 1
    return report
