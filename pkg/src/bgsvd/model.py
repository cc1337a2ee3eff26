"""Per-frame background model: normalization, projection, masking, updates.

Every incoming image is normalized to zero mean and unit sample standard
deviation, projected onto the leading ``i_hat`` basis directions, and
thresholded into a foreground mask.  Frames are buffered into blocks of
``beta``; a block is appended to the basis after temporally unstable frames
are dropped by a structural-similarity gate.  When the basis rank reaches
``n_star`` it is re-initialized, either by truncating the factored form
(strategy "iii", followed by a spectrum cap at rho) or by recomputing it
from recently stored background projections (strategy "ii").
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .subspace import (
    AppendReport,
    FactoredBasis,
    compute_rho,
    normalize_sigma,
    reinit_ii,
    reinit_iii,
    svd_append,
    svd_comp,
)


@dataclass
class Frame:
    """One vectorized grayscale image after normalization.

    ``pixels`` has zero mean and unit sample standard deviation unless the
    raw image was constant, in which case ``sd == 0`` marks the frame as
    degenerate and ``pixels`` is all zeros.
    """

    pixels: np.ndarray
    mu: float
    sd: float
    index: int
    width: int
    height: int

    @property
    def d(self) -> int:
        return self.pixels.size

    @property
    def degenerate(self) -> bool:
        return self.sd == 0.0


@dataclass
class Params:
    """Model parameters.

    The defaults are the generic setting that works across scene types:
    rank cap ell=15 after re-initialization, re-init trigger n_star=30,
    system size eta=30, slope threshold tau_star = 0.05 * rho, block size
    beta=6 with nu=3 similarity partners at cumulative time distance
    delta_t=6, similarity threshold s_bar=0.97, and mask threshold
    theta=1.0 in normalized intensity units.  ``period`` counts blocks
    between forced updates (0 disables them).  ``mu`` is the background
    store size for strategy "ii" and defaults to ``n_star``.
    """

    ell: int = 15
    n_star: int = 30
    eta: float = 30.0
    tau_star_factor: float = 0.05
    beta: int = 6
    nu: int = 3
    delta_t: int = 6
    s_bar: float = 0.97
    theta: float = 1.0
    period: int = 10
    strategy: str = "iii"
    mu: int | None = None
    morph_radius: int = 2
    min_blob_area: int = 15
    downsample_window: int = 1
    update_stride: int = 1

    def __post_init__(self):
        if self.mu is None:
            self.mu = self.n_star
        if not 1 <= self.ell <= self.n_star:
            raise ValueError("need 1 <= ell <= n_star")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.tau_star_factor < 0:
            raise ValueError("tau_star_factor must be non-negative")
        if self.beta < 1:
            raise ValueError("beta must be at least 1")
        if not 0 <= self.nu <= self.beta - 1:
            raise ValueError("need 0 <= nu <= beta - 1")
        if self.delta_t < self.nu:
            raise ValueError("need delta_t >= nu")
        if self.theta < 0:
            raise ValueError("theta must be non-negative")
        if self.period < 0:
            raise ValueError("period must be non-negative")
        if self.strategy not in ("ii", "iii"):
            raise ValueError("strategy must be 'ii' or 'iii'")
        if self.mu < 1:
            raise ValueError("mu must be at least 1")
        if self.morph_radius < 0 or self.min_blob_area < 0:
            raise ValueError("postprocessing sizes must be non-negative")
        if self.downsample_window < 1 or self.update_stride < 1:
            raise ValueError("downsample_window and update_stride must be >= 1")


@dataclass
class ModelState:
    """Mutable pipeline state; advanced exclusively by :func:`step`."""

    basis: FactoredBasis
    params: Params
    rho: float
    tau_star: float
    width: int
    height: int
    pending: list = field(default_factory=list)
    bg_store: list = field(default_factory=list)
    blocks_since_forced: int = 0
    frames_seen: int = 0
    updates_offered: int = 0
    frames_accepted: int = 0
    frames_rejected_tau: int = 0
    frames_rejected_similarity: int = 0
    degenerate_frames: int = 0
    blocks_appended: int = 0
    reinit_count: int = 0
    append_seconds: float = 0.0
    reinit_seconds: float = 0.0
    last_report: AppendReport | None = None

    @property
    def d(self) -> int:
        return self.width * self.height


class StepResult:
    """Outputs of one pipeline step.

    ``mask`` is the (height, width) boolean foreground map.  The masked
    original image and the de-normalized background estimate are
    materialized on first access, so mask-only consumers skip their cost.
    """

    __slots__ = ("mask", "state", "_raw", "_frame", "_projection",
                 "_foreground", "_background")

    def __init__(self, mask, state, raw, frame=None, projection=None):
        self.mask = mask
        self.state = state
        self._raw = raw
        self._frame = frame
        self._projection = projection
        self._foreground = None
        self._background = None

    @property
    def foreground(self) -> np.ndarray:
        if self._foreground is None:
            self._foreground = self._raw * self.mask
        return self._foreground

    @property
    def background(self) -> np.ndarray:
        if self._background is None:
            if self._projection is None:
                self._background = self._raw.copy()
            else:
                f = self._frame
                self._background = (self._projection * f.sd + f.mu).reshape(
                    self._raw.shape)
        return self._background


def normalize_frame(raw: np.ndarray, width: int | None = None,
                    height: int | None = None, index: int = 0) -> Frame:
    """Vectorize and normalize a raw image to zero mean, unit sample std.

    ``raw`` is a 2-d array, or 1-d with explicit ``width``/``height``.
    A constant image cannot be normalized and is returned flagged as
    degenerate (``sd == 0``, zero pixels).
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 2:
        height, width = arr.shape
    elif arr.ndim == 1:
        if width is None or height is None:
            raise ValueError("1-d input needs explicit width and height")
        if width * height != arr.size:
            raise ValueError("width * height does not match pixel count")
    else:
        raise ValueError("raw frame must be 1-d or 2-d")
    flat = arr.reshape(-1)
    if flat.size < 2:
        raise ValueError("frame needs at least two pixels")
    mu = float(np.mean(flat))
    dev = flat - mu
    sumsq = float(dev @ dev)
    if sumsq == 0.0:
        return Frame(np.zeros(flat.size), mu, 0.0, index, width, height)
    sd = float(np.sqrt(sumsq / (flat.size - 1)))
    dev *= 1.0 / sd
    return Frame(dev, mu, sd, index, width, height)


def project_background(basis: FactoredBasis, frame) -> np.ndarray:
    """Orthogonal projection onto the leading ``i_hat`` basis columns."""
    x = frame.pixels if isinstance(frame, Frame) else np.asarray(frame, dtype=float)
    if x.shape[0] != basis.d:
        raise ValueError("frame length %d does not match basis dimension %d"
                         % (x.shape[0], basis.d))
    u = basis.dense_u[:, : basis.i_hat]
    return u @ (u.T @ x)


def foreground_mask(frame: Frame, background: np.ndarray, theta: float) -> np.ndarray:
    """Boolean vector, true where |pixels - background| > theta."""
    if background.shape[0] != frame.d:
        raise ValueError("background length does not match frame")
    return np.abs(frame.pixels - background) > theta


def similarity(a: Frame, b: Frame) -> float:
    """Normalized covariance of two frames.

    Both frames are already zero-mean with unit sample standard deviation,
    so this reduces to the inner product scaled by 1 / (d - 1); the value
    of a frame with itself is exactly 1.
    """
    if a.degenerate or b.degenerate:
        raise ValueError("similarity undefined for degenerate frames")
    if a.d != b.d:
        raise ValueError("frames differ in size")
    return float(a.pixels @ b.pixels) / (a.d - 1)


def similarity_partners(m: int, i: int, nu: int, delta_t: int) -> list:
    """Deterministic partner choice for the mean-similarity of frame ``i``.

    From the 0-based block positions ``0..m-1`` excluding ``i``, pick the
    lexicographically first ``nu``-subset, in order of (distance, index),
    whose distances to ``i`` sum exactly to ``delta_t``.  When no subset
    reaches that sum the ``nu`` nearest neighbors are used instead.
    """
    if not 0 <= i < m:
        raise ValueError("frame position out of range")
    if nu < 1 or nu > m - 1:
        raise ValueError("need 1 <= nu <= m - 1")
    candidates = sorted((abs(j - i), j) for j in range(m) if j != i)
    for combo in itertools.combinations(candidates, nu):
        if sum(dist for dist, _ in combo) == delta_t:
            return [j for _, j in combo]
    return [j for _, j in candidates[:nu]]


def mean_similarity(block: list, i: int, nu: int, delta_t: int) -> float:
    """Mean similarity of frame ``i`` against its chosen block partners."""
    partners = similarity_partners(len(block), i, nu, delta_t)
    return sum(similarity(block[i], block[j]) for j in partners) / len(partners)


def forced_update_due(state: ModelState) -> bool:
    """True when the block about to complete is a forced (periodic) update."""
    period = state.params.period
    return period > 0 and state.blocks_since_forced + 1 >= period


def init_model(frames, params: Params) -> ModelState:
    """Build the initial model from a stack of raw images.

    ``frames`` is (n, height, width) or a sequence of 2-d arrays.  Each
    image is normalized; constant images are skipped.  The spectrum cap
    rho and the slope threshold tau_star are derived from the stacked
    initialization matrix.
    """
    arrs = [np.asarray(f, dtype=float) for f in frames]
    if not arrs:
        raise ValueError("no initialization frames")
    height, width = arrs[0].shape
    normalized = []
    for k, arr in enumerate(arrs):
        if arr.shape != (height, width):
            raise ValueError("initialization frame %d has mismatched shape" % k)
        f = normalize_frame(arr, index=k)
        if not f.degenerate:
            normalized.append(f)
    if not normalized:
        raise ValueError("all initialization frames are constant")
    a = np.column_stack([f.pixels for f in normalized])
    rho = compute_rho(a, params.eta)
    tau_star = params.tau_star_factor * rho
    basis = svd_comp(a, min(params.ell, a.shape[1]), tau_star)
    return ModelState(
        basis=basis, params=params, rho=rho, tau_star=tau_star,
        width=width, height=height,
    )


def step(state: ModelState, raw: np.ndarray) -> StepResult:
    """Process one frame: mask it against the current basis, then update.

    The mask is always computed against the basis as of frame arrival, so
    a block append triggered by this frame never changes its own output.
    Returns the boolean mask, the masked original image, the de-normalized
    background estimate and the advanced state.  Degenerate (constant)
    frames yield an all-background mask and never enter an update.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.shape != (state.height, state.width):
        raise ValueError("frame shape %s does not match model %s"
                         % (arr.shape, (state.height, state.width)))
    params = state.params
    state.frames_seen += 1
    eligible = (state.frames_seen - 1) % params.update_stride == 0
    frame = normalize_frame(arr, index=state.frames_seen)

    if frame.degenerate:
        if eligible:
            state.updates_offered += 1
            state.degenerate_frames += 1
        empty = np.zeros((state.height, state.width), dtype=bool)
        return StepResult(empty, state, arr)

    projection = project_background(state.basis, frame)
    maskvec = foreground_mask(frame, projection, params.theta)
    mask = maskvec.reshape(state.height, state.width)

    if eligible:
        state.pending.append(frame)
        if len(state.pending) == params.beta:
            _flush_block(state)

    return StepResult(mask, state, arr, frame, projection)


def _flush_block(state: ModelState) -> None:
    params = state.params
    block = state.pending
    state.pending = []
    m = len(block)
    state.updates_offered += m

    if params.nu >= 1 and m >= 2:
        survivors = [
            i for i in range(m)
            if mean_similarity(block, i, params.nu, params.delta_t) >= params.s_bar
        ]
    else:
        survivors = list(range(m))
    state.frames_rejected_similarity += m - len(survivors)

    forced = forced_update_due(state)
    state.blocks_since_forced += 1

    if survivors:
        if params.strategy == "ii":
            for i in survivors:
                state.bg_store.append(project_background(state.basis, block[i]))
            del state.bg_store[: -params.mu]
        cols = np.column_stack([block[i].pixels for i in survivors])
        t0 = time.perf_counter()
        basis, report = svd_append(
            state.basis, cols, state.tau_star,
            max_rank=params.n_star, force_accept=forced,
        )
        state.append_seconds += time.perf_counter() - t0
        state.basis = basis
        state.last_report = report
        state.blocks_appended += 1
        state.frames_accepted += len(survivors) - len(report.rejected_frames)
        state.frames_rejected_tau += len(report.rejected_frames)
        if forced:
            state.blocks_since_forced = 0

    if state.basis.rank >= params.n_star:
        t0 = time.perf_counter()
        if params.strategy == "ii" and state.bg_store:
            store = np.column_stack(state.bg_store)
            state.basis = reinit_ii(store, params.ell, state.tau_star)
            state.bg_store.clear()
        else:
            state.basis = normalize_sigma(reinit_iii(state.basis, params.ell), state.rho)
        state.reinit_seconds += time.perf_counter() - t0
        state.reinit_count += 1
