"""Incremental thresholded SVD of a columnwise-growing matrix.

The tracked object is a rank-r factored basis U = Refl(house) @ embed(u_small)
together with its singular values.  Columns are appended in blocks: the part
of a block inside the current span only redistributes singular values, while
directions orthogonal to the span are admitted only when their pivoted-QR
residual norm reaches a significance level tau.  tau is taken from the
spectrum itself as sigma[i_hat], where i_hat marks the first flat spot of the
singular-value curve (consecutive gap below the slope threshold tau_star).
The right singular vectors are never formed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .linalg import HouseholderStack, apply_stack, householder_qr

_EPS = np.finfo(float).eps


@dataclass
class FactoredBasis:
    """Orthonormal column basis in compact Householder form.

    The implied d x r factor is ``Refl(house) @ embed(u_small)`` where
    ``embed`` places the small orthogonal factor in the top r rows of a
    d x r matrix.  ``dense_u`` caches that product for fast projections;
    it is maintained by every operation and must never be mutated.
    Treat instances as immutable values.
    """

    u_small: np.ndarray        # (r, r) orthogonal
    sigma: np.ndarray          # (r,) non-increasing, >= 0
    house: HouseholderStack    # r reflections over dimension d
    i_hat: int                 # leading columns considered background, 1..r
    d: int
    dense_u: np.ndarray        # (d, r) cached implied factor

    @property
    def rank(self) -> int:
        return self.sigma.size

    def implied_u(self) -> np.ndarray:
        """Materialize the factor from its compact parts (for verification)."""
        embedded = np.zeros((self.d, self.rank))
        embedded[: self.rank, :] = self.u_small
        return apply_stack(self.house, embedded)


@dataclass
class AppendReport:
    """Outcome of one block append."""

    accepted: int              # new directions admitted to the basis
    rejected_frames: list      # column indices judged insignificant
    tau: float                 # significance level applied to residual pivots


def threshold_index(sigma: np.ndarray, tau_star: float):
    """First flat spot of the singular-value curve.

    Returns ``(i_hat, tau)`` where ``i_hat`` is the smallest i (1-based)
    with ``sigma[i-1] - sigma[i] < tau_star`` and ``tau = sigma[i_hat-1]``.
    When every consecutive gap is at least ``tau_star`` the whole spectrum
    counts as significant and ``i_hat = len(sigma)``.
    """
    s = np.asarray(sigma, dtype=float)
    if s.size < 1:
        raise ValueError("need at least one singular value")
    gaps = s[:-1] - s[1:]
    below = np.nonzero(gaps < tau_star)[0]
    i_hat = int(below[0]) + 1 if below.size else s.size
    return i_hat, float(s[i_hat - 1])


def _recompact(dense: np.ndarray, sigma: np.ndarray, i_hat: int) -> FactoredBasis:
    """Rebuild stack + small factor from a dense orthonormal column block."""
    d, k = dense.shape
    stack, rmat, _ = householder_qr(dense, pivoting=False)
    return FactoredBasis(
        u_small=rmat[:k, :].copy(),
        sigma=np.asarray(sigma, dtype=float),
        house=stack,
        i_hat=min(int(i_hat), k),
        d=d,
        dense_u=np.asfortranarray(dense),
    )


def svd_comp(matrix: np.ndarray, ell: int, tau_star: float) -> FactoredBasis:
    """Initialize a basis from the best rank-``ell`` approximation of ``matrix``.

    ``matrix`` is d x n with n <= d.  The returned basis has rank
    ``min(ell, rank(matrix))``; numerically zero singular values are
    dropped.  ``i_hat`` is chosen by :func:`threshold_index`.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.size == 0:
        raise ValueError("need a non-empty d x n matrix")
    d, n = a.shape
    if n > d:
        raise ValueError("more columns (%d) than rows (%d)" % (n, d))
    if ell < 1:
        raise ValueError("rank cap must be at least 1")
    ell = min(int(ell), n)

    stack, rmat, _ = householder_qr(a, pivoting=True)
    ur, sig, _ = np.linalg.svd(rmat[:n, :], full_matrices=False)
    tol = max(d, n) * _EPS * (sig[0] if sig.size else 0.0)
    rank = int(np.count_nonzero(sig > tol))
    if rank == 0:
        raise ValueError("zero matrix has no usable column space")
    k = min(ell, rank)

    embedded = np.zeros((d, k))
    embedded[:n, :] = ur[:, :k]
    dense = apply_stack(stack, embedded)
    i_hat, _ = threshold_index(sig[:k], tau_star)
    return _recompact(dense, sig[:k].copy(), i_hat)


def svd_append(
    basis: FactoredBasis,
    block: np.ndarray,
    tau_star: float,
    max_rank: int | None = None,
    force_accept: bool = False,
):
    """Append a d x m block of columns, admitting significant new directions.

    In-span components of the block always enter the spectrum.  Directions
    orthogonal to the span are kept only while their column-pivoted QR
    residual magnitude reaches tau = sigma[i_hat] of the current spectrum.
    ``tau_star == 0`` or ``force_accept`` disables that gate (columns with
    numerically zero residual still count as in-span), and ``max_rank``
    caps the rank of the result regardless of significance.

    Returns ``(new_basis, AppendReport)``.  The new singular values are
    those of the augmented matrix restricted to the retained directions.
    """
    b = np.asarray(block, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2 or b.shape[0] != basis.d:
        raise ValueError("block must have %d rows" % basis.d)
    d, m = b.shape
    if m < 1:
        raise ValueError("empty block")
    r = basis.rank
    if r + m > d:
        raise ValueError("rank %d + block width %d exceeds dimension %d" % (r, m, d))

    u = basis.dense_u
    z = u.T @ b

    _, tau = threshold_index(basis.sigma, tau_star)
    gate = 0.0 if (force_accept or tau_star == 0.0) else tau
    bnorm2 = np.einsum("ij,ij->j", b, b)
    colnorm = float(np.sqrt(np.max(bnorm2)))
    floor = max(d, m) * _EPS * colnorm
    level = max(gate, floor)
    # the leading residual pivot equals the largest residual column norm,
    # available by Pythagoras without forming the residual
    resid2 = np.clip(bnorm2 - np.einsum("ij,ij->j", z, z), 0.0, None)
    t = 0
    piv = np.arange(m)
    rmat = None
    qcols = None
    if level > 0.0 and float(np.max(resid2)) >= level * level:
        resid = b - u @ z
        # second projection pass keeps new directions orthogonal
        resid -= u @ (u.T @ resid)
        q_econ, rmat, piv = scipy.linalg.qr(resid, mode="economic", pivoting=True)
        pivots = np.abs(np.diagonal(rmat))
        t = int(np.count_nonzero(pivots >= level))
        t = min(t, m, d - r)
        if max_rank is not None:
            t = min(t, max(0, int(max_rank) - r))
        qcols = q_econ[:, :t]

    middle = np.zeros((r + t, r + m))
    middle[:r, :r] = np.diag(basis.sigma)
    middle[:r, r:] = z[:, piv]
    if t:
        middle[r:, r:] = rmat[:t, :]
    um, sig, _ = np.linalg.svd(middle, full_matrices=False)
    um = um[:, : r + t]

    # dense factor built through the transpose: the gemm output is then
    # already the Fortran layout that keeps projection slices contiguous
    dense_t = np.ascontiguousarray(um[:r, :].T) @ u.T
    if t:
        dense_t += np.ascontiguousarray(um[r:, :].T) @ qcols.T
        coords = apply_stack(basis.house, qcols, transposed=True)
        # the top r coordinate rows vanish because qcols is orthogonal to the span
        cstack, cr, _ = householder_qr(coords[r:, :], pivoting=False)
        tails = np.vstack([np.zeros((r, t)), cstack.vectors])
        house = basis.house.extended(tails)
        mix = np.zeros((r + t, r + t))
        mix[:r, :r] = basis.u_small
        mix[r:, r:] = cr[:t, :t]
        u_small = mix @ um
    else:
        house = basis.house
        u_small = basis.u_small @ um
    dense = dense_t.T

    i_hat, _ = threshold_index(sig, tau_star)
    out = FactoredBasis(
        u_small=u_small, sigma=sig, house=house, i_hat=i_hat, d=d, dense_u=dense
    )
    report = AppendReport(
        accepted=t,
        rejected_frames=sorted(int(c) for c in piv[t:]),
        tau=float(gate),
    )
    return out, report


def reinit_iii(basis: FactoredBasis, ell: int) -> FactoredBasis:
    """Truncate the basis to its leading ``min(ell, rank)`` directions.

    The columns of the factor are already left singular vectors, so the
    truncation keeps the top singular subspace exactly and copies the
    corresponding singular values unchanged.  Only the reflection stack
    is rebuilt, which amounts to one QR pass over the kept columns.
    """
    k = min(int(ell), basis.rank)
    if k < 1:
        raise ValueError("rank cap must be at least 1")
    if k == basis.rank:
        return basis
    return _recompact(
        basis.dense_u[:, :k].copy(), basis.sigma[:k].copy(), min(basis.i_hat, k)
    )


def reinit_ii(store: np.ndarray, ell: int, tau_star: float) -> FactoredBasis:
    """Fresh basis from a store of background images (one per column)."""
    s = np.asarray(store, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.size == 0 or s.shape[1] == 0:
        raise ValueError("empty background store")
    return svd_comp(s, min(int(ell), s.shape[1]), tau_star)


def compute_rho(matrix: np.ndarray, eta: float) -> float:
    """Frobenius cap rho = (||A||_F / sqrt(n)) * sqrt(eta) for n columns."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[1] < 1:
        raise ValueError("need a matrix with at least one column")
    n = a.shape[1]
    return float(np.linalg.norm(a) * np.sqrt(float(eta) / n))


def normalize_sigma(basis: FactoredBasis, rho: float) -> FactoredBasis:
    """Rescale the spectrum so its 2-norm does not exceed ``rho``.

    The subspace, ordering and i_hat are untouched; when the norm is
    already within the bound the basis is returned unchanged.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    nrm = float(np.linalg.norm(basis.sigma))
    if nrm <= rho:
        return basis
    return replace(basis, sigma=basis.sigma * (rho / nrm))
