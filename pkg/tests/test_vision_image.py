"""Image primitives against brute-force oracles."""

import numpy as np
import pytest

from liesensor.errors import DataFormatError
from liesensor.vision import (
    BoundingBox,
    bilinear_resize,
    crop_face,
    integral_image,
    pgm_bytes,
    read_pgm,
    read_pgm_bytes,
    scale_pixels,
    write_pgm,
)


class TestScalePixels:
    def test_endpoints_and_midpoint(self):
        out = scale_pixels(np.array([[0, 128, 255]], dtype=np.uint8))
        assert out.shape == (1, 3, 1)
        assert out[0, 0, 0] == -1.0
        assert out[0, 2, 0] == 1.0
        assert out[0, 1, 0] == pytest.approx((128 / 255 - 0.5) * 2, abs=1e-12)

    def test_monotonic(self):
        ramp = np.arange(256, dtype=np.uint8).reshape(1, -1)
        out = scale_pixels(ramp).ravel()
        assert np.all(np.diff(out) > 0)
        assert out.min() == -1.0 and out.max() == 1.0


class TestIntegralImage:
    def test_all_ones_2x2(self):
        ii = integral_image(np.ones((2, 2), dtype=np.uint8))
        assert ii.rect_sum(0, 0, 2, 2) == 4

    def test_full_frame_equals_total(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, size=(7, 9), dtype=np.uint8)
        ii = integral_image(img)
        assert ii.rect_sum(0, 0, 9, 7) == int(img.sum())

    def test_first_row_col_zero(self):
        img = np.full((4, 4), 200, dtype=np.uint8)
        ii = integral_image(img)
        assert np.all(ii.sums[0, :] == 0) and np.all(ii.sums[:, 0] == 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_rects_match_bruteforce(self, seed):
        rng = np.random.default_rng(seed)
        img = rng.integers(0, 256, size=(5, 5), dtype=np.uint8)
        ii = integral_image(img)
        for _ in range(20):
            x = int(rng.integers(0, 5))
            y = int(rng.integers(0, 5))
            w = int(rng.integers(1, 6 - x))
            h = int(rng.integers(1, 6 - y))
            brute = int(img[y : y + h, x : x + w].astype(np.int64).sum())
            brute_sq = int((img[y : y + h, x : x + w].astype(np.int64) ** 2).sum())
            assert ii.rect_sum(x, y, w, h) == brute
            assert ii.rect_sq_sum(x, y, w, h) == brute_sq


class TestBilinearAndCrop:
    def test_resample_identity(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
        out = crop_face(img, BoundingBox(0, 0, 48, 48, score=1))
        assert np.array_equal(out, img)

    def test_constant_stays_constant(self):
        img = np.full((96, 96), 77, dtype=np.uint8)
        out = crop_face(img, BoundingBox(0, 0, 96, 96, score=1))
        assert out.shape == (48, 48)
        assert np.all(out == 77)

    def test_checkerboard_downsample_matches_reference(self):
        yy, xx = np.mgrid[0:96, 0:96]
        img = (((yy // 1 + xx // 1) % 2) * 255).astype(np.uint8)
        out = crop_face(img, BoundingBox(0, 0, 96, 96, score=1))

        # independent bilinear reference with half-pixel centers
        src = img.astype(np.float64)
        ref = np.zeros((48, 48))
        for i in range(48):
            for j in range(48):
                sy = (i + 0.5) * 2 - 0.5
                sx = (j + 0.5) * 2 - 0.5
                y0, x0 = int(np.floor(sy)), int(np.floor(sx))
                fy, fx = sy - y0, sx - x0
                y1, x1 = min(y0 + 1, 95), min(x0 + 1, 95)
                ref[i, j] = (
                    src[y0, x0] * (1 - fy) * (1 - fx)
                    + src[y0, x1] * (1 - fy) * fx
                    + src[y1, x0] * fy * (1 - fx)
                    + src[y1, x1] * fy * fx
                )
        assert np.max(np.abs(out.astype(np.float64) - ref)) <= 1.0

    def test_out_of_bounds_box_errors(self):
        img = np.zeros((40, 40), dtype=np.uint8)
        with pytest.raises(ValueError, match="bounds"):
            crop_face(img, BoundingBox(10, 10, 40, 40, score=1))
        with pytest.raises(ValueError):
            crop_face(img, BoundingBox(-1, 0, 10, 10, score=1))

    def test_bilinear_resize_shapes(self):
        img = np.arange(36, dtype=np.float64).reshape(6, 6)
        out = bilinear_resize(img, 3, 9)
        assert out.shape == (3, 9)


class TestPgm:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, size=(13, 17), dtype=np.uint8)
        path = tmp_path / "img.pgm"
        write_pgm(img, path)
        assert np.array_equal(read_pgm(path), img)

    def test_header_with_comment(self):
        data = b"P5\n# a comment\n3 2\n255\n" + bytes(range(6))
        img = read_pgm_bytes(data)
        assert img.shape == (2, 3)
        assert img[1, 2] == 5

    def test_bad_magic(self):
        with pytest.raises(DataFormatError, match="P5"):
            read_pgm_bytes(b"P6\n1 1\n255\n\x00")

    def test_short_payload(self):
        with pytest.raises(DataFormatError, match="payload"):
            read_pgm_bytes(b"P5\n4 4\n255\n\x00\x00")

    def test_bad_maxval(self):
        with pytest.raises(DataFormatError, match="maxval"):
            read_pgm_bytes(b"P5\n1 1\n65535\n\x00\x00")

    def test_canonical_bytes(self):
        img = np.array([[0, 255]], dtype=np.uint8)
        assert pgm_bytes(img) == b"P5\n2 1\n255\n\x00\xff"
