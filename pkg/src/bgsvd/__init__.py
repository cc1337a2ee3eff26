"""Streaming background subtraction via an incrementally updated, thresholded SVD."""

from .estimator import SVDBackgroundSubtractor
from .linalg import HouseholderStack, apply_stack, dense_svd, qr_column_pivot
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    accumulate_confusion,
    compute_metrics,
)
from .model import (
    Frame,
    ModelState,
    Params,
    StepResult,
    foreground_mask,
    forced_update_due,
    init_model,
    mean_similarity,
    normalize_frame,
    project_background,
    similarity,
    step,
)
from .postprocess import clean_mask, morph_close, remove_small_blobs
from .subspace import (
    AppendReport,
    FactoredBasis,
    compute_rho,
    normalize_sigma,
    reinit_ii,
    reinit_iii,
    svd_append,
    svd_comp,
    threshold_index,
)
from .video_io import CdnetSequence, FrameSource, downsample, read_sequence, to_grayscale

__version__ = "0.1.0"

__all__ = [
    "AppendReport",
    "CdnetSequence",
    "ConfusionCounts",
    "FactoredBasis",
    "Frame",
    "FrameSource",
    "HouseholderStack",
    "MetricsReport",
    "ModelState",
    "Params",
    "StepResult",
    "SVDBackgroundSubtractor",
    "accumulate_confusion",
    "apply_stack",
    "clean_mask",
    "compute_metrics",
    "compute_rho",
    "dense_svd",
    "downsample",
    "foreground_mask",
    "forced_update_due",
    "init_model",
    "mean_similarity",
    "morph_close",
    "normalize_frame",
    "normalize_sigma",
    "project_background",
    "qr_column_pivot",
    "read_sequence",
    "reinit_ii",
    "reinit_iii",
    "remove_small_blobs",
    "similarity",
    "step",
    "svd_append",
    "svd_comp",
    "threshold_index",
    "to_grayscale",
]
