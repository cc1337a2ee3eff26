"""Binary mask cleanup: morphological closing and small-blob removal."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_EIGHT = np.ones((3, 3), dtype=bool)


def disk_kernel(radius: int) -> np.ndarray:
    """Discrete disk: offsets with dx^2 + dy^2 <= radius^2."""
    r = int(radius)
    if r < 0:
        raise ValueError("radius must be non-negative")
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return xx * xx + yy * yy <= r * r


def _disk_offsets(radius: int) -> list:
    r = int(radius)
    return [
        (dy, dx)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if dy * dy + dx * dx <= r * r
    ]


def _shifted_reduce(mask: np.ndarray, offsets: list, erode: bool) -> np.ndarray:
    """OR (dilate) or AND (erode) of the mask over a set of shifts.

    Shifts falling outside the image contribute background to the OR and
    foreground to the AND, which keeps closing idempotent at the border.
    """
    h, w = mask.shape
    out = np.ones_like(mask) if erode else np.zeros_like(mask)
    for dy, dx in offsets:
        ys, ye = max(dy, 0), h + min(dy, 0)
        xs, xe = max(dx, 0), w + min(dx, 0)
        src = mask[ys - dy : ye - dy, xs - dx : xe - dx]
        if erode:
            out[ys:ye, xs:xe] &= src
        else:
            out[ys:ye, xs:xe] |= src
    return out


def morph_close(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilation then erosion with a disk of the given radius.

    Pixels outside the image count as background for the dilation and as
    foreground for the erosion, which keeps the operation idempotent and
    extensive up to the image border.
    """
    m = np.asarray(mask, dtype=bool)
    if radius == 0:
        return m.copy()
    offsets = _disk_offsets(radius)
    return _shifted_reduce(_shifted_reduce(m, offsets, erode=False), offsets, erode=True)


def remove_small_blobs(mask: np.ndarray, min_area: int) -> np.ndarray:
    """Clear 8-connected components with fewer than ``min_area`` pixels."""
    if min_area < 0:
        raise ValueError("min_area must be non-negative")
    m = np.asarray(mask, dtype=bool)
    if min_area <= 1 or not m.any():
        return m.copy()
    labels, count = ndimage.label(m, structure=_EIGHT)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= min_area
    keep[0] = False
    return keep[labels]


def clean_mask(mask: np.ndarray, radius: int, min_area: int) -> np.ndarray:
    """Closing followed by blob filtering; zero parameters are no-ops."""
    out = morph_close(mask, radius)
    return remove_small_blobs(out, min_area)
