"""Grayscale image primitives: PGM I/O, pixel scaling, integral images,
bilinear resampling and face-patch cropping.

Gray images are (height, width) uint8 arrays throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from liesensor.corpus import IMAGE_SIDE
from liesensor.errors import DataFormatError


def scale_pixels(img: np.ndarray) -> np.ndarray:
    """Map gray bytes into [-1, 1]: (p/255 - 0.5) * 2, shape (h, w, 1)."""
    arr = np.asarray(img, dtype=np.float64)
    scaled = (arr / 255.0 - 0.5) * 2.0
    return scaled[..., np.newaxis] if scaled.ndim == 2 else scaled


@dataclass
class IntegralImage:
    """Summed-area tables with exact integer arithmetic.

    ``sums[y, x]`` is the pixel total over [0, x) x [0, y); the first row and
    column are zero. ``sq_sums`` holds the same for squared pixels, which
    gives per-window variance for detection-time normalization.
    """

    sums: np.ndarray  # (h+1, w+1) int64
    sq_sums: np.ndarray  # (h+1, w+1) int64

    @property
    def height(self) -> int:
        return self.sums.shape[0] - 1

    @property
    def width(self) -> int:
        return self.sums.shape[1] - 1

    def rect_sum(self, x: int, y: int, w: int, h: int) -> int:
        s = self.sums
        return int(s[y + h, x + w] - s[y, x + w] - s[y + h, x] + s[y, x])

    def rect_sq_sum(self, x: int, y: int, w: int, h: int) -> int:
        s = self.sq_sums
        return int(s[y + h, x + w] - s[y, x + w] - s[y + h, x] + s[y, x])


def integral_image(img: np.ndarray) -> IntegralImage:
    arr = np.asarray(img, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {arr.shape}")
    h, w = arr.shape
    sums = np.zeros((h + 1, w + 1), dtype=np.int64)
    sq_sums = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(arr, axis=0), axis=1, out=sums[1:, 1:])
    np.cumsum(np.cumsum(arr * arr, axis=0), axis=1, out=sq_sums[1:, 1:])
    return IntegralImage(sums=sums, sq_sums=sq_sums)


def sample_bilinear(src: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Bilinear samples of ``src`` (float, 2-D) at fractional coords, edge-clamped."""
    h, w = src.shape
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = ys - y0
    fx = xs - x0
    top = src[y0, x0] * (1.0 - fx) + src[y0, x1] * fx
    bottom = src[y1, x0] * (1.0 - fx) + src[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def bilinear_resize(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Resize with half-pixel-center sampling; float64 output."""
    arr = np.asarray(src, dtype=np.float64)
    in_h, in_w = arr.shape
    if (in_h, in_w) == (out_h, out_w):
        return arr.copy()
    sy = in_h / out_h
    sx = in_w / out_w
    ys = (np.arange(out_h) + 0.5) * sy - 0.5
    xs = (np.arange(out_w) + 0.5) * sx - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return sample_bilinear(arr, grid_y, grid_x)


def crop_face(img: np.ndarray, box) -> np.ndarray:
    """Crop the box then resample to the 48x48 network input size."""
    h, w = img.shape
    if box.x < 0 or box.y < 0 or box.w <= 0 or box.h <= 0:
        raise ValueError(f"invalid box {box}")
    if box.x + box.w > w or box.y + box.h > h:
        raise ValueError(f"box {box} out of image bounds {w}x{h}")
    patch = img[box.y : box.y + box.h, box.x : box.x + box.w]
    resized = bilinear_resize(patch, IMAGE_SIDE, IMAGE_SIDE)
    return np.clip(np.rint(resized), 0, 255).astype(np.uint8)


def _parse_pgm_header(data: bytes) -> tuple[int, int, int, int]:
    """Returns (width, height, maxval, data_offset)."""
    if len(data) < 2 or data[:2] != b"P5":
        raise DataFormatError("not a binary PGM (missing P5 magic)")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token:
            raise DataFormatError("truncated PGM header")
        try:
            fields.append(int(token))
        except ValueError:
            raise DataFormatError(f"bad PGM header token {token!r}") from None
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise DataFormatError("PGM header not terminated by whitespace")
    pos += 1
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise DataFormatError(f"bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise DataFormatError(f"unsupported PGM maxval {maxval} (need 8-bit)")
    return width, height, maxval, pos


def read_pgm_bytes(data: bytes) -> np.ndarray:
    width, height, _, offset = _parse_pgm_header(data)
    need = width * height
    pixels = data[offset : offset + need]
    if len(pixels) != need:
        raise DataFormatError(
            f"PGM payload has {len(pixels)} bytes, header promises {need}"
        )
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_pgm_bytes(fh.read())


def pgm_bytes(img: np.ndarray) -> bytes:
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D gray image, got shape {arr.shape}")
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes()


def write_pgm(img: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img))
