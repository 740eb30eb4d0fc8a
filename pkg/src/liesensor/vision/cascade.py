"""Stump-stage cascade classifier: old-style XML parsing, serialization and
sliding-window face detection over an image pyramid.

A window passes a stage when the sum of its stump votes reaches the stage
threshold; it is a detection when every stage passes. Stump feature values
are variance-normalized: value = sum(weight_i * rect_sum_i) / (sigma * area),
and zero-variance windows are rejected outright.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional

import numpy as np

from liesensor.errors import CascadeFormatError
from liesensor.vision.image import bilinear_resize, integral_image


@dataclass(frozen=True)
class HaarRect:
    x: int
    y: int
    w: int
    h: int
    weight: float


@dataclass(frozen=True)
class WeakClassifier:
    rects: tuple[HaarRect, ...]
    node_threshold: float
    left_val: float
    right_val: float


@dataclass(frozen=True)
class Stage:
    stage_threshold: float
    weaks: tuple[WeakClassifier, ...]


@dataclass(frozen=True)
class Cascade:
    window_w: int
    window_h: int
    stages: tuple[Stage, ...]

    def __post_init__(self):
        for si, stage in enumerate(self.stages):
            if not stage.weaks:
                raise CascadeFormatError(f"stage {si} has no weak classifiers")
            for wi, weak in enumerate(stage.weaks):
                if not weak.rects:
                    raise CascadeFormatError(f"stage {si} weak {wi} has no rects")
                if len(weak.rects) > 3:
                    raise CascadeFormatError(
                        f"stage {si} weak {wi} has {len(weak.rects)} rects (max 3)"
                    )
                for ri, rect in enumerate(weak.rects):
                    if (
                        rect.x < 0
                        or rect.y < 0
                        or rect.w <= 0
                        or rect.h <= 0
                        or rect.x + rect.w > self.window_w
                        or rect.y + rect.h > self.window_h
                    ):
                        raise CascadeFormatError(
                            f"stage {si} weak {wi} rect {ri} outside "
                            f"{self.window_w}x{self.window_h} window"
                        )

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def n_weaks(self) -> int:
        return sum(len(s.weaks) for s in self.stages)


@dataclass(frozen=True)
class BoundingBox:
    """Detection box in source-image pixels; score counts stages passed."""

    x: int
    y: int
    w: int
    h: int
    score: int

    @property
    def area(self) -> int:
        return self.w * self.h


@dataclass(frozen=True)
class DetectParams:
    scale_factor: float = 1.1
    step: int = 1
    min_size: Optional[int] = None  # defaults to the cascade window
    max_size: Optional[int] = None
    min_neighbors: int = 2
    iou_threshold: float = 0.3

    def __post_init__(self):
        if self.scale_factor <= 1.0:
            raise ValueError("scale_factor must be > 1")
        if self.step < 1:
            raise ValueError("step must be >= 1")


def _text(elem, path: str, where: str) -> str:
    child = elem.find(path)
    if child is None or child.text is None:
        raise CascadeFormatError(f"{where}: missing element {path!r}")
    return child.text.strip()


def _parse_weak(tree_elem, where: str) -> WeakClassifier:
    nodes = tree_elem.findall("_")
    if len(nodes) != 1:
        raise CascadeFormatError(
            f"{where}: tree has {len(nodes)} nodes, only stump (single-node) "
            "classifiers are supported"
        )
    node = nodes[0]
    if node.find("left_node") is not None or node.find("right_node") is not None:
        raise CascadeFormatError(f"{where}: branch nodes are not supported (non-stump)")
    feature = node.find("feature")
    if feature is None:
        raise CascadeFormatError(f"{where}: missing <feature>")
    tilted = feature.find("tilted")
    if tilted is not None and tilted.text and int(tilted.text.strip()) != 0:
        raise CascadeFormatError(f"{where}: tilted features are not supported")
    rects_elem = feature.find("rects")
    if rects_elem is None:
        raise CascadeFormatError(f"{where}: missing <rects>")
    rects = []
    for ri, rect_elem in enumerate(rects_elem.findall("_")):
        parts = (rect_elem.text or "").split()
        if len(parts) != 5:
            raise CascadeFormatError(f"{where} rect {ri}: expected 5 fields, got {parts}")
        try:
            x, y, w, h = (int(p) for p in parts[:4])
            weight = float(parts[4])
        except ValueError:
            raise CascadeFormatError(f"{where} rect {ri}: bad numeric field") from None
        rects.append(HaarRect(x, y, w, h, weight))
    return WeakClassifier(
        rects=tuple(rects),
        node_threshold=float(_text(node, "threshold", where)),
        left_val=float(_text(node, "left_val", where)),
        right_val=float(_text(node, "right_val", where)),
    )


def parse_cascade_xml(text: str) -> Cascade:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise CascadeFormatError(f"malformed cascade XML: {exc}") from exc
    classifier = None
    for child in root:
        if child.get("type_id") == "opencv-haar-classifier":
            classifier = child
            break
    if classifier is None:
        raise CascadeFormatError(
            "no element with type_id='opencv-haar-classifier' (old-style stump cascade)"
        )
    size_parts = _text(classifier, "size", "cascade").split()
    if len(size_parts) != 2:
        raise CascadeFormatError(f"bad <size> {size_parts}")
    window_w, window_h = int(size_parts[0]), int(size_parts[1])
    stages_elem = classifier.find("stages")
    if stages_elem is None:
        raise CascadeFormatError("missing <stages>")
    stages = []
    for si, stage_elem in enumerate(stages_elem.findall("_")):
        where = f"stage {si}"
        trees = stage_elem.find("trees")
        if trees is None:
            raise CascadeFormatError(f"{where}: missing <trees>")
        weaks = tuple(
            _parse_weak(tree_elem, f"{where} weak {wi}")
            for wi, tree_elem in enumerate(trees.findall("_"))
        )
        stages.append(
            Stage(
                stage_threshold=float(_text(stage_elem, "stage_threshold", where)),
                weaks=weaks,
            )
        )
    return Cascade(window_w=window_w, window_h=window_h, stages=tuple(stages))


def load_cascade(path) -> Cascade:
    """Parse an old-style stump cascade XML file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CascadeFormatError(f"{path}: {exc}") from exc
    return parse_cascade_xml(text)


def cascade_xml(cascade: Cascade, name: str = "cascade") -> str:
    """Serialize back to the old-style XML (structural round-trip)."""
    lines = ['<?xml version="1.0"?>', "<opencv_storage>"]
    lines.append(f'<{name} type_id="opencv-haar-classifier">')
    lines.append(f"  <size>{cascade.window_w} {cascade.window_h}</size>")
    lines.append("  <stages>")
    for stage in cascade.stages:
        lines.append("    <_>")
        lines.append("      <trees>")
        for weak in stage.weaks:
            lines.append("        <_>")
            lines.append("          <_>")
            lines.append("            <feature>")
            lines.append("              <rects>")
            for r in weak.rects:
                lines.append(f"                <_>{r.x} {r.y} {r.w} {r.h} {r.weight!r}</_>")
            lines.append("              </rects>")
            lines.append("              <tilted>0</tilted>")
            lines.append("            </feature>")
            lines.append(f"            <threshold>{weak.node_threshold!r}</threshold>")
            lines.append(f"            <left_val>{weak.left_val!r}</left_val>")
            lines.append(f"            <right_val>{weak.right_val!r}</right_val>")
            lines.append("          </_>")
            lines.append("        </_>")
        lines.append("      </trees>")
        lines.append(f"      <stage_threshold>{stage.stage_threshold!r}</stage_threshold>")
        lines.append("    </_>")
    lines.append("  </stages>")
    lines.append(f"</{name}>")
    lines.append("</opencv_storage>")
    return "\n".join(lines) + "\n"


def save_cascade(cascade: Cascade, path, name: str = "cascade") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cascade_xml(cascade, name))


def scan_windows(img: np.ndarray, cascade: Cascade, step: int = 1) -> list[tuple[int, int]]:
    """All (x, y) origins of base-size windows that pass every stage.

    Vectorized over window positions; windows with non-positive variance are
    rejected before any stage runs.
    """
    h, w = img.shape
    ww, wh = cascade.window_w, cascade.window_h
    if h < wh or w < ww:
        return []
    integral = integral_image(img)
    ys = np.arange(0, h - wh + 1, step)
    xs = np.arange(0, w - ww + 1, step)
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    area = float(ww * wh)

    def rect_sums(table: np.ndarray, rx: int, ry: int, rw: int, rh: int) -> np.ndarray:
        y0 = grid_y + ry
        x0 = grid_x + rx
        return (
            table[y0 + rh, x0 + rw]
            - table[y0, x0 + rw]
            - table[y0 + rh, x0]
            + table[y0, x0]
        ).astype(np.float64)

    win_sum = rect_sums(integral.sums, 0, 0, ww, wh)
    win_sq = rect_sums(integral.sq_sums, 0, 0, ww, wh)
    mean = win_sum / area
    variance = win_sq / area - mean * mean
    alive = variance > 0.0
    sigma = np.sqrt(np.where(alive, variance, 1.0))
    norm = sigma * area
    for stage in cascade.stages:
        if not np.any(alive):
            break
        votes = np.zeros_like(win_sum)
        for weak in stage.weaks:
            feature = np.zeros_like(win_sum)
            for r in weak.rects:
                feature += r.weight * rect_sums(integral.sums, r.x, r.y, r.w, r.h)
            value = feature / norm
            votes += np.where(value < weak.node_threshold, weak.left_val, weak.right_val)
        alive &= votes >= stage.stage_threshold
    hit_y, hit_x = np.nonzero(alive)
    return [(int(grid_x[i, j]), int(grid_y[i, j])) for i, j in zip(hit_y, hit_x)]


def _iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = max(0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
    iy = max(0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def _merge_boxes(raw: list[BoundingBox], params: DetectParams) -> list[BoundingBox]:
    merged: list[BoundingBox] = []
    claimed = [False] * len(raw)
    for i, seed in enumerate(raw):
        if claimed[i]:
            continue
        cluster = [seed]
        claimed[i] = True
        for j in range(i + 1, len(raw)):
            if not claimed[j] and _iou(seed, raw[j]) > params.iou_threshold:
                cluster.append(raw[j])
                claimed[j] = True
        if len(cluster) < params.min_neighbors:
            continue
        merged.append(
            BoundingBox(
                x=int(round(sum(b.x for b in cluster) / len(cluster))),
                y=int(round(sum(b.y for b in cluster) / len(cluster))),
                w=int(round(sum(b.w for b in cluster) / len(cluster))),
                h=int(round(sum(b.h for b in cluster) / len(cluster))),
                score=seed.score,
            )
        )
    return merged


def detect_faces(
    img: np.ndarray, cascade: Cascade, params: DetectParams = DetectParams()
) -> list[BoundingBox]:
    """Multi-scale detection: scan a pyramid, merge overlapping raw hits.

    Returns merged boxes (possibly empty), largest area first with a fixed
    (y, x) tie order. Images smaller than the cascade window give [].
    """
    h, w = img.shape
    min_size = params.min_size if params.min_size is not None else max(
        cascade.window_w, cascade.window_h
    )
    raw: list[BoundingBox] = []
    scale = 1.0
    n_stages = cascade.n_stages
    while True:
        win_w = cascade.window_w * scale
        win_h = cascade.window_h * scale
        if win_w > w or win_h > h:
            break
        if params.max_size is not None and max(win_w, win_h) > params.max_size:
            break
        if max(win_w, win_h) >= min_size:
            level_h = int(round(h / scale))
            level_w = int(round(w / scale))
            if level_h >= cascade.window_h and level_w >= cascade.window_w:
                if scale == 1.0:
                    level_img = img
                else:
                    level_img = np.clip(
                        np.rint(bilinear_resize(img.astype(np.float64), level_h, level_w)),
                        0,
                        255,
                    ).astype(np.uint8)
                for x, y in scan_windows(level_img, cascade, step=params.step):
                    bx = int(round(x * scale))
                    by = int(round(y * scale))
                    bw = min(int(round(cascade.window_w * scale)), w - bx)
                    bh = min(int(round(cascade.window_h * scale)), h - by)
                    raw.append(BoundingBox(bx, by, bw, bh, score=n_stages))
        scale *= params.scale_factor
    merged = _merge_boxes(raw, params)
    merged.sort(key=lambda b: (-b.area, b.y, b.x))
    return merged


def pick_face(boxes: list[BoundingBox]) -> Optional[BoundingBox]:
    """The largest detection, or None."""
    return boxes[0] if boxes else None
