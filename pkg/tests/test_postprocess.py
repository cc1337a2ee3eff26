import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgsvd.postprocess import clean_mask, disk_kernel, morph_close, remove_small_blobs


def naive_dilate(mask, radius):
    """Per-pixel oracle; outside the image counts as background."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    offsets = [(dy, dx) for dy in range(-radius, radius + 1)
               for dx in range(-radius, radius + 1)
               if dy * dy + dx * dx <= radius * radius]
    for y in range(h):
        for x in range(w):
            out[y, x] = any(
                0 <= y + dy < h and 0 <= x + dx < w and mask[y + dy, x + dx]
                for dy, dx in offsets
            )
    return out


def naive_erode(mask, radius):
    """Per-pixel oracle; outside the image counts as foreground."""
    h, w = mask.shape
    out = np.zeros_like(mask)
    offsets = [(dy, dx) for dy in range(-radius, radius + 1)
               for dx in range(-radius, radius + 1)
               if dy * dy + dx * dx <= radius * radius]
    for y in range(h):
        for x in range(w):
            out[y, x] = all(
                mask[y + dy, x + dx]
                for dy, dx in offsets
                if 0 <= y + dy < h and 0 <= x + dx < w
            )
    return out


def naive_components(mask):
    """8-connected flood fill labelling oracle."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=int)
    current = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                current += 1
                stack = [(y, x)]
                labels[y, x] = current
                while stack:
                    cy, cx = stack.pop()
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx = cy + dy, cx + dx
                            if (0 <= ny < h and 0 <= nx < w and mask[ny, nx]
                                    and labels[ny, nx] == 0):
                                labels[ny, nx] = current
                                stack.append((ny, nx))
    return labels, current


class TestMorphClose:
    def test_radius_zero_identity(self):
        mask = np.random.default_rng(0).random((8, 8)) > 0.6
        np.testing.assert_array_equal(morph_close(mask, 0), mask)

    def test_hole_filled(self):
        mask = np.zeros((9, 9), dtype=bool)
        mask[2:7, 2:7] = True
        mask[4, 4] = False
        out = morph_close(mask, 1)
        assert out[4, 4]
        assert out[2:7, 2:7].all()

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(1)
        for radius in (1, 2):
            mask = rng.random((12, 14)) > 0.55
            expected = naive_erode(naive_dilate(mask, radius), radius)
            np.testing.assert_array_equal(morph_close(mask, radius), expected)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            mask = rng.random((15, 15)) > 0.6
            once = morph_close(mask, 2)
            np.testing.assert_array_equal(morph_close(once, 2), once)

    def test_disk_kernel_shape(self):
        k = disk_kernel(2)
        assert k.shape == (5, 5)
        assert not k[0, 0] and k[2, 2] and k[0, 2]


class TestRemoveSmallBlobs:
    def test_single_pixel_cleared(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[2, 2] = True
        assert not remove_small_blobs(mask, 2).any()

    def test_exact_min_area_kept(self):
        mask = np.zeros((5, 5), dtype=bool)
        mask[1, 1:4] = True
        np.testing.assert_array_equal(remove_small_blobs(mask, 3), mask)

    def test_size_filter(self):
        mask = np.zeros((10, 10), dtype=bool)
        mask[1, 1:4] = True           # 3 pixels
        mask[5:7, 5:10] = True        # 10 pixels
        out = remove_small_blobs(mask, 5)
        assert not out[1, 1:4].any()
        assert out[5:7, 5:10].all()

    def test_matches_component_oracle(self):
        rng = np.random.default_rng(3)
        mask = rng.random((16, 16)) > 0.7
        labels, count = naive_components(mask)
        min_area = 4
        expected = np.zeros_like(mask)
        for c in range(1, count + 1):
            if np.count_nonzero(labels == c) >= min_area:
                expected |= labels == c
        np.testing.assert_array_equal(remove_small_blobs(mask, min_area), expected)

    def test_diagonal_pixels_are_connected(self):
        mask = np.zeros((4, 4), dtype=bool)
        mask[0, 0] = mask[1, 1] = mask[2, 2] = True
        np.testing.assert_array_equal(remove_small_blobs(mask, 3), mask)

    @given(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=40, deadline=None)
    def test_monotone(self, seed, min_area):
        mask = np.random.default_rng(seed).random((10, 10)) > 0.5
        out = remove_small_blobs(mask, min_area)
        assert not (out & ~mask).any()

    def test_negative_min_area_rejected(self):
        with pytest.raises(ValueError):
            remove_small_blobs(np.zeros((3, 3), bool), -1)


def test_clean_mask_composition():
    rng = np.random.default_rng(4)
    mask = rng.random((20, 20)) > 0.55
    expected = remove_small_blobs(morph_close(mask, 2), 6)
    np.testing.assert_array_equal(clean_mask(mask, 2, 6), expected)
