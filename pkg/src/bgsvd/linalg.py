"""Householder-based dense linear algebra for tall-and-skinny factors.

The tall orthogonal factor of a low-rank model is never stored as an
explicit d x d matrix.  It is kept as a stack of elementary reflections
I - 2 h h^T with unit vectors h, so applying it to a d x m operand costs
O(d * m * len(stack)).  A zero vector stands for the identity reflection,
which keeps degenerate pivot columns representable without special cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import blas


@dataclass
class HouseholderStack:
    """Ordered reflection vectors h_1 .. h_k over dimension d.

    The represented operator is the product Refl(h_1) @ ... @ Refl(h_k)
    with Refl(h) = I - 2 h h^T.  Vectors are the columns of a (d, k)
    array; each column has unit 2-norm or is identically zero.
    """

    vectors: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "HouseholderStack":
        return cls(np.zeros((d, 0)))

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.vectors.shape[1]

    def extended(self, tail: np.ndarray) -> "HouseholderStack":
        """New stack with the columns of ``tail`` appended at the end."""
        if tail.shape[0] != self.d:
            raise ValueError("tail vectors must have length %d" % self.d)
        return HouseholderStack(np.hstack([self.vectors, tail]))


def apply_stack(stack: HouseholderStack, x: np.ndarray, transposed: bool = False) -> np.ndarray:
    """Multiply the stack's operator (or its transpose) onto ``x``.

    ``x`` may be a vector of length d or a d x m matrix.  With
    ``transposed=False`` this computes Refl(h_1) ... Refl(h_k) @ x, the
    reversed-order product otherwise.  Reflections are involutions, so
    applying the stack and then its transpose restores the input.
    """
    if x.shape[0] != stack.d:
        raise ValueError("operand has %d rows, stack expects %d" % (x.shape[0], stack.d))
    arr = np.asarray(x, dtype=float)
    vec = arr.ndim == 1
    if vec:
        arr = arr[:, None]
    # work on the transpose so every pass is contiguous; the rank-1 update
    # runs through BLAS without allocating a d x m temporary per reflection
    yt = np.array(arr.T, order="C")
    k = len(stack)
    order = range(k) if transposed else range(k - 1, -1, -1)
    h = stack.vectors
    for j in order:
        v = h[:, j]
        w = yt @ v
        blas.dger(-2.0, v, w, a=yt.T, overwrite_a=1)
    y = yt.T
    return y[:, 0].copy() if vec else y


def householder_qr(matrix: np.ndarray, pivoting: bool = True):
    """QR factorization with the orthogonal factor left as a reflection stack.

    Returns ``(stack, r, piv)`` such that ``matrix[:, piv]`` equals the
    stack's operator applied to ``r`` (a p x q upper-trapezoidal matrix
    with exact zeros below the diagonal).  With ``pivoting`` the columns
    are processed in order of largest remaining 2-norm, ties going to the
    lowest column index, so ``abs(diag(r))`` is non-increasing.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValueError("need a 2-d matrix")
    p, q = a.shape
    k = min(p, q)
    vs = np.zeros((p, k))
    piv = np.arange(q)
    # column operations on a tall matrix are contiguous on the transpose
    at = np.array(a.T, order="C")
    work = np.empty_like(at)
    for j in range(k):
        if pivoting:
            sub = at[j:, j:]
            norms = np.einsum("ij,ij->i", sub, sub)
            jmax = int(np.argmax(norms))  # argmax takes the first maximum
            if jmax:
                at[[j, j + jmax], :] = at[[j + jmax, j], :]
                piv[[j, j + jmax]] = piv[[j + jmax, j]]
        x = at[j, j:]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        v = x.copy()
        v[0] += np.copysign(nx, x[0]) if x[0] != 0.0 else nx
        v /= np.linalg.norm(v)
        vs[j:, j] = v
        w = at[j:, j:] @ v
        upd = work[: q - j, : p - j]
        np.multiply(w[:, None], (2.0 * v)[None, :], out=upd)
        at[j:, j:] -= upd
        at[j, j + 1:] = 0.0
    if p > q:
        at[:, q:] = 0.0
    return HouseholderStack(vs), np.array(at.T, order="C"), piv


def qr_column_pivot(matrix: np.ndarray):
    """Column-pivoted QR with a dense orthogonal factor.

    Returns ``(q, r, piv)`` with ``matrix[:, piv] == q @ r``, ``q`` a full
    p x p orthogonal matrix and ``abs(diag(r))`` non-increasing.  Only
    meant for block-scale inputs; large operands should stay in stack
    form via :func:`householder_qr`.
    """
    stack, r, piv = householder_qr(matrix, pivoting=True)
    q = apply_stack(stack, np.eye(stack.d))
    return q, r, piv


def dense_svd(matrix: np.ndarray, want_v: bool = True):
    """Full SVD of a small dense matrix, singular values sorted descending.

    Returns ``(u, s, v)`` with ``matrix == u[:, :len(s)] @ diag(s) @ v.T``
    (``v`` is ``None`` when ``want_v`` is false).
    """
    m = np.asarray(matrix, dtype=float)
    u, s, vt = np.linalg.svd(m, full_matrices=True)
    return u, s, (vt.T if want_v else None)
