"""Timing study: summed append / re-initialization time across image sizes."""

from __future__ import annotations

import numpy as np

from .model import Params, init_model, step

DECIMATION = {1: (1, 1), 2: (1, 2), 4: (2, 2), 8: (2, 4), 16: (4, 4)}


def decimate(img: np.ndarray, divisor: int) -> np.ndarray:
    """Reduce the pixel count by ``divisor`` via strided row/column picks."""
    if divisor not in DECIMATION:
        raise ValueError("divisor must be one of %s" % sorted(DECIMATION))
    ry, rx = DECIMATION[divisor]
    return np.asarray(img, dtype=float)[::ry, ::rx]


def run_update_timing(init_frames, stream_frames, params: Params,
                      n_update_frames: int = 900) -> dict:
    """Drive the pipeline until ``n_update_frames`` frames were offered for
    background updates, cycling the stream if needed.

    Returns the summed append and re-initialization seconds together with
    basic counters.
    """
    state = init_model(init_frames, params)
    frames = list(stream_frames)
    if not frames:
        raise ValueError("empty frame stream")
    k = 0
    while state.updates_offered + len(state.pending) < n_update_frames:
        step(state, frames[k % len(frames)])
        k += 1
    return {
        "pixels": state.d,
        "frames_processed": state.frames_seen,
        "append_seconds": state.append_seconds,
        "reinit_seconds": state.reinit_seconds,
        "reinits": state.reinit_count,
        "blocks": state.blocks_appended,
    }


def timing_table(rows: list) -> list:
    """Attach scaling factors t_i / (t_base * pixels_i / pixels_base).

    ``rows`` is a list of dicts from :func:`run_update_timing`, one per
    image size; the smallest size is the baseline.  Factors near 1 mean
    the cost scales linearly with the pixel count.
    """
    base = min(rows, key=lambda r: r["pixels"])
    out = []
    for row in rows:
        scale = row["pixels"] / base["pixels"]
        entry = dict(row)
        entry["append_factor"] = (
            row["append_seconds"] / (base["append_seconds"] * scale)
            if base["append_seconds"] > 0 else 0.0
        )
        entry["reinit_factor"] = (
            row["reinit_seconds"] / (base["reinit_seconds"] * scale)
            if base["reinit_seconds"] > 0 else 0.0
        )
        out.append(entry)
    return out
