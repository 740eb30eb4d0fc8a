"""Image preprocessing and Viola-Jones style face detection."""

from liesensor.vision.image import (
    IntegralImage,
    bilinear_resize,
    crop_face,
    integral_image,
    pgm_bytes,
    read_pgm,
    read_pgm_bytes,
    sample_bilinear,
    scale_pixels,
    write_pgm,
)
from liesensor.vision.cascade import (
    BoundingBox,
    Cascade,
    DetectParams,
    HaarRect,
    Stage,
    WeakClassifier,
    detect_faces,
    load_cascade,
    pick_face,
    save_cascade,
    scan_windows,
)

__all__ = [
    "IntegralImage",
    "integral_image",
    "scale_pixels",
    "bilinear_resize",
    "sample_bilinear",
    "crop_face",
    "read_pgm",
    "read_pgm_bytes",
    "write_pgm",
    "pgm_bytes",
    "HaarRect",
    "WeakClassifier",
    "Stage",
    "Cascade",
    "BoundingBox",
    "DetectParams",
    "load_cascade",
    "save_cascade",
    "scan_windows",
    "detect_faces",
    "pick_face",
]
