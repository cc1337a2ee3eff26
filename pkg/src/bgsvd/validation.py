"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np


def check_frame_stack(X) -> np.ndarray:
    """Coerce input to a finite float array of shape (n_frames, height, width).

    Accepts (n, h, w) stacks, sequences of 2-d arrays, or a 2-d
    (n_frames, n_pixels) matrix whose rows are flattened single-row
    images.
    """
    if isinstance(X, np.ndarray):
        arr = X.astype(float, copy=False)
    else:
        arr = np.asarray([np.asarray(f, dtype=float) for f in X])
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise ValueError("expected (n_frames, height, width) input, got shape %s"
                         % (arr.shape,))
    if arr.shape[0] < 1:
        raise ValueError("need at least one frame")
    if arr.shape[1] * arr.shape[2] < 2:
        raise ValueError("frames need at least two pixels")
    if not np.isfinite(arr).all():
        raise ValueError("frames contain non-finite values")
    return arr


def check_image(img) -> np.ndarray:
    """Coerce a single image to a finite 2-d float array."""
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a 2-d image, got shape %s" % (arr.shape,))
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite values")
    return arr
