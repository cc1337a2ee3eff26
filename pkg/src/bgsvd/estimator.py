"""Scikit-learn style front end for the streaming background model."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .model import Params, StepResult, init_model, step
from .postprocess import clean_mask
from .validation import check_frame_stack


class SVDBackgroundSubtractor(BaseEstimator):
    """Background subtraction by low-rank subspace tracking.

    ``fit(X)`` builds the initial background basis from a stack of frames.
    ``predict(X)`` returns one boolean foreground mask per frame and
    ``transform(X)`` the per-frame background estimates.  The model is an
    online one: predict and transform consume the stream in order and
    keep updating the fitted state, so calls are not idempotent.

    Parameters
    ----------
    ell : int
        Basis rank kept after a re-initialization.
    n_star : int
        Rank at which a re-initialization is triggered.
    eta : float
        System size; bounds the spectrum norm at sqrt(eta) average frames.
    tau_star_factor : float
        Slope threshold for significant directions, as a fraction of the
        spectrum bound rho.
    beta, nu, delta_t, s_bar : block size, number of similarity partners,
        cumulative partner time distance, and similarity threshold of the
        temporal stability gate.
    theta : float
        Mask threshold in normalized intensity units.
    period : int
        Blocks between forced updates that bypass the significance gate
        (0 disables them).
    strategy : {"iii", "ii"}
        Re-initialization flavor: truncate the factored basis ("iii") or
        recompute it from stored background projections ("ii").
    mu : int or None
        Background store size for strategy "ii"; defaults to ``n_star``.
    update_stride : int
        Consider only every k-th frame for background updates.
    morph_radius, min_blob_area : int
        Mask postprocessing applied by ``predict`` (0 disables).
    """

    def __init__(self, ell=15, n_star=30, eta=30.0, tau_star_factor=0.05,
                 beta=6, nu=3, delta_t=6, s_bar=0.97, theta=1.0, period=10,
                 strategy="iii", mu=None, update_stride=1,
                 morph_radius=2, min_blob_area=15):
        self.ell = ell
        self.n_star = n_star
        self.eta = eta
        self.tau_star_factor = tau_star_factor
        self.beta = beta
        self.nu = nu
        self.delta_t = delta_t
        self.s_bar = s_bar
        self.theta = theta
        self.period = period
        self.strategy = strategy
        self.mu = mu
        self.update_stride = update_stride
        self.morph_radius = morph_radius
        self.min_blob_area = min_blob_area

    def _make_params(self) -> Params:
        return Params(
            ell=self.ell, n_star=self.n_star, eta=self.eta,
            tau_star_factor=self.tau_star_factor, beta=self.beta, nu=self.nu,
            delta_t=self.delta_t, s_bar=self.s_bar, theta=self.theta,
            period=self.period, strategy=self.strategy, mu=self.mu,
            update_stride=self.update_stride, morph_radius=self.morph_radius,
            min_blob_area=self.min_blob_area,
        )

    def fit(self, X, y=None):
        frames = check_frame_stack(X)
        self.state_ = init_model(frames, self._make_params())
        self.height_ = self.state_.height
        self.width_ = self.state_.width
        self.n_features_in_ = self.height_ * self.width_
        return self

    def _check_fitted(self):
        if not hasattr(self, "state_"):
            raise NotFittedError("call fit before predict/transform")

    def step(self, frame) -> StepResult:
        """Advance the model by a single frame and return its results."""
        self._check_fitted()
        arr = np.asarray(frame, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(self.height_, self.width_)
        return step(self.state_, arr)

    def predict(self, X) -> np.ndarray:
        """Foreground masks for a stream of frames, updating the model."""
        self._check_fitted()
        frames = check_frame_stack(X)
        masks = np.empty((frames.shape[0], self.height_, self.width_), dtype=bool)
        for k in range(frames.shape[0]):
            result = step(self.state_, frames[k])
            mask = result.mask
            if self.morph_radius > 0 or self.min_blob_area > 0:
                mask = clean_mask(mask, self.morph_radius, self.min_blob_area)
            masks[k] = mask
        return masks

    def transform(self, X) -> np.ndarray:
        """Background estimates (original intensity scale) per frame."""
        self._check_fitted()
        frames = check_frame_stack(X)
        out = np.empty((frames.shape[0], self.height_, self.width_))
        for k in range(frames.shape[0]):
            out[k] = step(self.state_, frames[k]).background
        return out

    def fit_predict(self, X, y=None, init_count: int | None = None) -> np.ndarray:
        """Fit on the first ``init_count`` frames, then predict the rest."""
        frames = check_frame_stack(X)
        n_init = init_count if init_count is not None else min(self.ell, len(frames))
        self.fit(frames[:n_init])
        return self.predict(frames[n_init:])
