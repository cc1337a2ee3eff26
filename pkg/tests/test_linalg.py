import numpy as np
import pytest

from bgsvd.linalg import (
    HouseholderStack,
    apply_stack,
    dense_svd,
    householder_qr,
    qr_column_pivot,
)


def reflect_dense(stack):
    """Dense oracle: multiply out (I - 2 h h^T) factors explicitly."""
    d = stack.d
    out = np.eye(d)
    for j in range(len(stack)):
        v = stack.vectors[:, j]
        out = out @ (np.eye(d) - 2.0 * np.outer(v, v))
    return out


class TestApplyStack:
    def test_empty_stack_is_identity(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((5, 3))
        out = apply_stack(HouseholderStack.identity(5), x)
        np.testing.assert_array_equal(out, x)

    def test_single_basis_vector_reflects(self):
        # with true reflections e1 maps to -e1
        e1 = np.zeros(4)
        e1[0] = 1.0
        stack = HouseholderStack(e1[:, None])
        np.testing.assert_allclose(apply_stack(stack, e1), -e1, atol=1e-15)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        vs = rng.standard_normal((7, 3))
        vs /= np.linalg.norm(vs, axis=0)
        stack = HouseholderStack(vs)
        x = rng.standard_normal((7, 4))
        dense = reflect_dense(stack)
        np.testing.assert_allclose(apply_stack(stack, x), dense @ x, atol=1e-12)
        np.testing.assert_allclose(
            apply_stack(stack, x, transposed=True), dense.T @ x, atol=1e-12
        )

    def test_roundtrip_is_identity(self):
        rng = np.random.default_rng(2)
        vs = rng.standard_normal((9, 4))
        vs /= np.linalg.norm(vs, axis=0)
        stack = HouseholderStack(vs)
        x = rng.standard_normal((9, 3))
        back = apply_stack(stack, apply_stack(stack, x), transposed=True)
        assert np.max(np.abs(back - x)) / np.max(np.abs(x)) < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(3)
        vs = rng.standard_normal((6, 2))
        vs /= np.linalg.norm(vs, axis=0)
        stack = HouseholderStack(vs)
        x = rng.standard_normal((6, 3))
        y = rng.standard_normal((6, 3))
        lhs = apply_stack(stack, x + y)
        rhs = apply_stack(stack, x) + apply_stack(stack, y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_dimension_mismatch(self):
        stack = HouseholderStack.identity(4)
        with pytest.raises(ValueError):
            apply_stack(stack, np.zeros((5, 2)))


class TestQrColumnPivot:
    def test_identity(self):
        q, r, piv = qr_column_pivot(np.eye(3))
        np.testing.assert_allclose(np.abs(q), np.eye(3), atol=1e-14)
        np.testing.assert_allclose(np.abs(r), np.eye(3), atol=1e-14)
        assert sorted(piv.tolist()) == [0, 1, 2]

    def test_single_nonzero_column_pivots_first(self):
        m = np.zeros((4, 3))
        c = np.array([1.0, 2.0, -1.0, 0.5])
        m[:, 2] = c
        q, r, piv = qr_column_pivot(m)
        assert piv[0] == 2
        assert abs(abs(r[0, 0]) - np.linalg.norm(c)) < 1e-14

    def test_random_reconstruction(self):
        rng = np.random.default_rng(4)
        m = rng.standard_normal((6, 4))
        q, r, piv = qr_column_pivot(m)
        err = np.linalg.norm(m[:, piv] - q @ r) / np.linalg.norm(m)
        assert err < 1e-12
        diag = np.abs(np.diag(r))
        assert np.all(np.diff(diag) <= 1e-14)
        np.testing.assert_allclose(q.T @ q, np.eye(6), atol=1e-12)
        assert sorted(piv.tolist()) == list(range(4))

    def test_zero_matrix(self):
        q, r, piv = qr_column_pivot(np.zeros((3, 2)))
        np.testing.assert_array_equal(r, np.zeros((3, 2)))
        np.testing.assert_allclose(q, np.eye(3))
        assert sorted(piv.tolist()) == [0, 1]

    def test_ties_prefer_lowest_index(self):
        # two columns with equal norm: the first must be pivoted first
        m = np.array([[2.0, 2.0, 1.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]])
        _, _, piv = qr_column_pivot(m)
        assert piv[0] == 0

    def test_wide_matrix(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((3, 5))
        q, r, piv = qr_column_pivot(m)
        err = np.linalg.norm(m[:, piv] - q @ r) / np.linalg.norm(m)
        assert err < 1e-12


class TestDenseSvd:
    def test_diagonal(self):
        u, s, v = dense_svd(np.diag([3.0, 2.0]))
        np.testing.assert_allclose(s, [3.0, 2.0])
        np.testing.assert_allclose(np.abs(u), np.eye(2), atol=1e-14)
        np.testing.assert_allclose(np.abs(v), np.eye(2), atol=1e-14)

    def test_rank_one_outer_product(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal(5)
        b = rng.standard_normal(3)
        m = np.outer(a, b)
        _, s, _ = dense_svd(m, want_v=False)
        assert abs(s[0] - np.linalg.norm(a) * np.linalg.norm(b)) < 1e-12
        assert np.all(s[1:] < 1e-12)

    def test_matches_gram_eigenvalues(self):
        # oracle: singular values are square roots of eig(M^T M)
        rng = np.random.default_rng(7)
        m = rng.standard_normal((10, 7))
        _, s, _ = dense_svd(m)
        gram_eigs = np.sort(np.linalg.eigvalsh(m.T @ m))[::-1]
        np.testing.assert_allclose(s, np.sqrt(np.clip(gram_eigs, 0, None)),
                                   rtol=1e-10, atol=1e-10)

    def test_reconstruction_and_invariants(self):
        rng = np.random.default_rng(8)
        m = rng.standard_normal((8, 5))
        u, s, v = dense_svd(m)
        rec = u[:, :5] @ np.diag(s) @ v.T[:5, :]
        assert np.linalg.norm(rec - m) / np.linalg.norm(m) < 1e-12
        assert np.max(np.abs(u.T @ u - np.eye(8))) < 1e-12
        fro2 = np.linalg.norm(m) ** 2
        assert abs(np.sum(s**2) - fro2) / fro2 < 1e-10
        assert np.all(np.diff(s) <= 0)
