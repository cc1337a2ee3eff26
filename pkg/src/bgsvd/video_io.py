"""Frame ingestion: decoding, grayscale conversion, box downsampling.

Sequences are plain directories of image files (PNG/PGM/JPEG) read in
lexicographic order.  Benchmark sequences follow the changedetection.net
layout: ``input/in%06d.jpg``, ``groundtruth/gt%06d.png`` and a
``temporalROI.txt`` holding the first and last evaluated frame number.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

IMAGE_SUFFIXES = {".png", ".pgm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luma conversion 0.299 R + 0.587 G + 0.114 B; grayscale passes through."""
    arr = np.asarray(img, dtype=float)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        return arr[..., :3] @ LUMA_WEIGHTS
    raise ValueError("expected a 2-d image or an image with 3/4 channels")


def downsample(img: np.ndarray, window: int) -> np.ndarray:
    """Average over non-overlapping window x window blocks.

    Dimensions that the window does not divide are padded by edge
    replication first, so the output size is ceil(h/w) x ceil(w/w).
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    arr = np.asarray(img, dtype=float)
    if window == 1:
        return arr.copy()
    h, w = arr.shape
    ph = (-h) % window
    pw = (-w) % window
    if ph or pw:
        arr = np.pad(arr, ((0, ph), (0, pw)), mode="edge")
    h2, w2 = arr.shape
    return arr.reshape(h2 // window, window, w2 // window, window).mean(axis=(1, 3))


def load_image(path) -> np.ndarray:
    """Decode an image file to a 2-d float grayscale array."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "I", "I;16", "F"):
                arr = np.asarray(im, dtype=float)
            else:
                arr = to_grayscale(np.asarray(im.convert("RGB"), dtype=float))
    except Exception as exc:
        raise IOError("cannot read image %s: %s" % (path, exc)) from exc
    if arr.ndim != 2:
        raise IOError("image %s did not decode to a single channel" % path)
    return arr


def load_labels(path) -> np.ndarray:
    """Decode a ground-truth annotation image as uint8 labels."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except Exception as exc:
        raise IOError("cannot read ground truth %s: %s" % (path, exc)) from exc


def write_mask(path, mask: np.ndarray) -> None:
    """Write a boolean mask as an 8-bit image with values {0, 255}."""
    out = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(out, mode="L").save(Path(path))


def write_gray(path, img: np.ndarray) -> None:
    """Write a float image clipped to 8-bit intensities."""
    out = np.rint(np.clip(np.asarray(img, dtype=float), 0, 255)).astype(np.uint8)
    Image.fromarray(out, mode="L").save(Path(path))


@dataclass
class FrameSource:
    """Directory of image frames delivered in deterministic order."""

    directory: Path
    pattern: str | None = None
    downsample_window: int = 1
    stride: int = 1

    def __post_init__(self):
        self.directory = Path(self.directory)
        if self.stride < 1:
            raise ValueError("stride must be at least 1")


def list_frames(source: FrameSource) -> list:
    """Frame files of the source in lexicographic order (stride not applied)."""
    if not source.directory.is_dir():
        raise IOError("input directory %s does not exist" % source.directory)
    if source.pattern:
        files = sorted(source.directory.glob(source.pattern))
    else:
        files = sorted(
            p for p in source.directory.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        )
    return files


def read_sequence(source: FrameSource):
    """Yield ``(index, path, image)`` for every stride-th frame.

    ``index`` counts emitted frames from 0.  All frames must share one
    size; a mismatching or unreadable file aborts with its name.
    """
    files = list_frames(source)
    shape = None
    for k, path in enumerate(files[:: source.stride]):
        img = load_image(path)
        if source.downsample_window > 1:
            img = downsample(img, source.downsample_window)
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise IOError("frame %s has size %s, expected %s" % (path, img.shape, shape))
        yield k, path, img


@dataclass
class CdnetSequence:
    """One changedetection.net-style sequence on disk."""

    root: Path
    input_dir: Path
    groundtruth_dir: Path
    t_start: int
    t_end: int

    @classmethod
    def from_root(cls, root) -> "CdnetSequence":
        root = Path(root)
        input_dir = root / "input"
        gt_dir = root / "groundtruth"
        roi = root / "temporalROI.txt"
        if not input_dir.is_dir():
            raise IOError("missing input directory %s" % input_dir)
        if not roi.is_file():
            raise IOError("missing %s" % roi)
        parts = roi.read_text().split()
        if len(parts) < 2:
            raise IOError("%s must contain two integers" % roi)
        t_start, t_end = int(parts[0]), int(parts[1])
        return cls(root, input_dir, gt_dir, t_start, t_end)

    def input_files(self) -> list:
        return list_frames(FrameSource(self.input_dir))

    def groundtruth_path(self, frame_number: int) -> Path:
        return self.groundtruth_dir / ("gt%06d.png" % frame_number)


def frame_number(path) -> int:
    """Frame number encoded in a file name like in000347.jpg."""
    digits = "".join(c for c in Path(path).stem if c.isdigit())
    if not digits:
        raise ValueError("no frame number in file name %s" % path)
    return int(digits)
