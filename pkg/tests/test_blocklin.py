"""Kernel-layer tests: block quadforms/solves, normal matrix, Cholesky, Woodbury."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ripm.blocklin import (
    BlockDiagMatrix,
    BlockStructure,
    block_quadform,
    block_solve,
    cholesky_factor,
    cholesky_solve,
    normal_matrix,
    woodbury_downdate,
)
from ripm.errors import FactorizationFailure, SingularBlock, UpdateSingular


def random_psd(rng, k, scale=1.0):
    G = rng.standard_normal((k, k))
    return scale * (G @ G.T) + 1e-3 * np.eye(k)


def random_block_diag(rng, sizes, scale=1.0):
    st_ = BlockStructure(sizes)
    return BlockDiagMatrix(st_, [random_psd(rng, k, scale) for k in sizes])


# ---------------------------------------------------------------------------
# BlockStructure
# ---------------------------------------------------------------------------

class TestBlockStructure:
    def test_offsets_and_totals(self):
        s = BlockStructure([1, 2, 1, 3])
        assert s.m == 4
        assert s.n == 7
        assert list(s.offsets) == [0, 1, 3, 4, 7]

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            BlockStructure([])
        with pytest.raises(ValueError):
            BlockStructure([0, 1])
        with pytest.raises(ValueError):
            BlockStructure([5])  # exceeds max_block_dim default 4

    def test_flat_indices_sorted_block_order(self):
        s = BlockStructure([2, 1, 2])
        # canonical order sorts block indices regardless of input order
        np.testing.assert_array_equal(s.flat_indices([2, 0]), [0, 1, 3, 4])

    def test_block_of_map(self):
        s = BlockStructure([2, 3])
        np.testing.assert_array_equal(s.block_of, [0, 0, 1, 1, 1])


# ---------------------------------------------------------------------------
# BlockDiagMatrix
# ---------------------------------------------------------------------------

class TestBlockDiagMatrix:
    def test_apply_matches_dense(self):
        rng = np.random.default_rng(0)
        H = random_block_diag(rng, [2, 1, 3, 2])
        v = rng.standard_normal(H.structure.n)
        np.testing.assert_allclose(H.apply(v), H.to_dense() @ v, rtol=1e-12)

    def test_uniform_scalar_stack_path_matches_generic(self):
        rng = np.random.default_rng(1)
        d = rng.uniform(0.5, 2.0, 6)
        s = BlockStructure([1] * 6)
        H = BlockDiagMatrix(s, [np.array([[di]]) for di in d])
        v = rng.standard_normal(6)
        np.testing.assert_allclose(H.apply(v), d * v, rtol=1e-14)
        np.testing.assert_allclose(H.quadform_norms(v), np.sqrt(d) * np.abs(v),
                                   rtol=1e-12)

    def test_sqrt_squares_back(self):
        rng = np.random.default_rng(2)
        H = random_block_diag(rng, [3, 2, 4])
        root = H.sqrt()
        for i in range(H.structure.m):
            np.testing.assert_allclose(root.block(i) @ root.block(i), H.block(i),
                                       rtol=1e-9, atol=1e-11)

    def test_psd_tagging(self):
        s = BlockStructure([2])
        good = BlockDiagMatrix(s, [np.eye(2)])
        bad = BlockDiagMatrix(s, [np.diag([1.0, -0.5])])
        assert good.is_psd()
        assert not bad.is_psd()

    def test_symmetry_check(self):
        s = BlockStructure([2])
        with pytest.raises(ValueError, match="not symmetric"):
            BlockDiagMatrix(s, [np.array([[1.0, 2.0], [0.0, 1.0]])], check=True)

    def test_from_diag_roundtrip(self):
        s = BlockStructure([2, 1])
        d = np.array([1.0, 2.0, 3.0])
        H = BlockDiagMatrix.from_diag(s, d)
        np.testing.assert_allclose(H.diag_vector(), d)


# ---------------------------------------------------------------------------
# block_quadform
# ---------------------------------------------------------------------------

class TestBlockQuadform:
    def test_identity_1x1(self):
        s = BlockStructure([1])
        H = BlockDiagMatrix.identity(s)
        assert block_quadform(H, np.array([3.0]), 0) == pytest.approx(3.0)

    def test_scalar_diag4(self):
        s = BlockStructure([1])
        H = BlockDiagMatrix(s, [np.array([[4.0]])])
        assert block_quadform(H, np.array([1.0]), 0) == pytest.approx(2.0)

    def test_matches_triple_product(self):
        rng = np.random.default_rng(3)
        s = BlockStructure([2])
        Hb = random_psd(rng, 2)
        H = BlockDiagMatrix(s, [Hb])
        v = rng.standard_normal(2)
        # independent oracle: explicit triple product
        expect = np.sqrt(sum(v[a] * Hb[a, c] * v[c] for a in range(2) for c in range(2)))
        assert block_quadform(H, v, 0) == pytest.approx(expect, rel=1e-12)

    def test_dimension_mismatch(self):
        s = BlockStructure([2])
        H = BlockDiagMatrix.identity(s)
        with pytest.raises(ValueError):
            block_quadform(H, np.array([1.0]), 0)


# ---------------------------------------------------------------------------
# block_solve
# ---------------------------------------------------------------------------

class TestBlockSolve:
    def test_identity(self):
        rng = np.random.default_rng(4)
        s = BlockStructure([2, 2, 1])
        H = BlockDiagMatrix.identity(s)
        v = rng.standard_normal(5)
        np.testing.assert_allclose(block_solve(H, v), v)

    def test_scalar_division(self):
        s = BlockStructure([1])
        H = BlockDiagMatrix(s, [np.array([[2.0]])])
        np.testing.assert_allclose(block_solve(H, np.array([4.0])), [2.0])

    def test_residual_small(self):
        rng = np.random.default_rng(5)
        H = random_block_diag(rng, [3, 3])
        v = rng.standard_normal(6)
        out = block_solve(H, v)
        assert np.linalg.norm(H.apply(out) - v) <= 1e-10 * np.linalg.norm(v)

    def test_singular_block_reports_index(self):
        s = BlockStructure([1, 1, 1])
        H = BlockDiagMatrix(s, [np.array([[1.0]]), np.array([[0.0]]), np.array([[1.0]])])
        with pytest.raises(SingularBlock) as e:
            block_solve(H, np.ones(3))
        assert e.value.block_index == 1

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        sizes = list(rng.integers(1, 5, size=rng.integers(1, 6)))
        H = random_block_diag(rng, sizes)
        v = rng.standard_normal(sum(sizes))
        out = block_solve(H, v)
        assert np.linalg.norm(H.apply(out) - v) <= 1e-8 * max(np.linalg.norm(v), 1e-30)


# ---------------------------------------------------------------------------
# normal_matrix
# ---------------------------------------------------------------------------

class TestNormalMatrix:
    def test_row_of_ones(self):
        A = np.array([[1.0, 1.0]])
        V = BlockDiagMatrix.identity(BlockStructure([1, 1]))
        np.testing.assert_allclose(normal_matrix(A, V), [[2.0]])

    def test_identity_A_embeds_V(self):
        rng = np.random.default_rng(6)
        V = random_block_diag(rng, [2, 2])
        A = np.eye(4)
        np.testing.assert_allclose(normal_matrix(A, V), V.to_dense(), rtol=1e-12)

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(7)
        V = random_block_diag(rng, [2, 1, 1])
        A = rng.standard_normal((2, 4))
        Vd = V.to_dense()
        naive = np.zeros((2, 2))
        for a in range(2):
            for c in range(2):
                for i in range(4):
                    for j in range(4):
                        naive[a, c] += A[a, i] * Vd[i, j] * A[c, j]
        np.testing.assert_allclose(normal_matrix(A, V), naive, rtol=1e-10)

    def test_spd_for_full_row_rank(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            V = random_block_diag(rng, [1] * 8)
            A = rng.standard_normal((3, 8))
            S = normal_matrix(A, V)
            assert np.linalg.eigvalsh(S)[0] > 0


# ---------------------------------------------------------------------------
# cholesky
# ---------------------------------------------------------------------------

class TestCholesky:
    def test_identity(self):
        B = np.arange(6.0).reshape(3, 2)
        np.testing.assert_allclose(cholesky_solve(np.eye(3), B), B)

    def test_diagonal_inverse(self):
        S = np.diag([4.0, 9.0])
        np.testing.assert_allclose(cholesky_solve(S, np.eye(2)),
                                   np.diag([0.25, 1.0 / 9.0]), rtol=1e-14)

    def test_residual(self):
        rng = np.random.default_rng(9)
        S = random_psd(rng, 5)
        B = rng.standard_normal((5, 3))
        X = cholesky_solve(S, B)
        assert np.linalg.norm(S @ X - B) < 1e-10 * np.linalg.norm(B)

    def test_vector_rhs(self):
        rng = np.random.default_rng(10)
        S = random_psd(rng, 4)
        b = rng.standard_normal(4)
        x = cholesky_solve(S, b)
        assert x.shape == (4,)
        np.testing.assert_allclose(S @ x, b, rtol=1e-8, atol=1e-12)

    def test_failure_on_indefinite(self):
        with pytest.raises(FactorizationFailure):
            cholesky_factor(np.diag([1.0, -1.0]))


# ---------------------------------------------------------------------------
# woodbury_downdate
# ---------------------------------------------------------------------------

def projection_product(A, vdiag):
    """Direct oracle: A^T (A V A^T)^{-1} A for diagonal V."""
    K = (A * vdiag) @ A.T
    return A.T @ np.linalg.solve(K, A)


class TestWoodburyDowndate:
    def test_zero_delta_is_noop(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((2, 3))
        M = projection_product(A, np.ones(3))
        out = woodbury_downdate(M, np.array([0, 2]), np.zeros((2, 2)))
        np.testing.assert_allclose(out, M, rtol=1e-12)

    def test_single_block_update_matches_direct(self):
        rng = np.random.default_rng(12)
        A = rng.standard_normal((2, 3))
        v = rng.uniform(0.5, 2.0, 3)
        M = projection_product(A, v)
        v_new = v.copy()
        v_new[1] += 0.7
        out = woodbury_downdate(M, np.array([1]), np.array([[0.7]]))
        np.testing.assert_allclose(out, projection_product(A, v_new), rtol=1e-8)

    def test_full_support_matches_direct(self):
        rng = np.random.default_rng(13)
        A = rng.standard_normal((3, 6))
        v = rng.uniform(0.5, 2.0, 6)
        delta = np.diag(rng.uniform(-0.2, 0.8, 6))
        M = projection_product(A, v)
        out = woodbury_downdate(M, np.arange(6), delta)
        np.testing.assert_allclose(out, projection_product(A, v + np.diag(delta)),
                                   rtol=1e-8)

    def test_result_symmetric(self):
        rng = np.random.default_rng(14)
        A = rng.standard_normal((4, 10))
        v = rng.uniform(0.5, 2.0, 10)
        M = projection_product(A, v)
        idx = np.array([0, 3, 7])
        out = woodbury_downdate(M, idx, np.diag([0.3, -0.1, 0.5]))
        assert np.max(np.abs(out - out.T)) < 1e-10

    def test_random_instances_match_direct(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            n = int(rng.integers(4, 64))
            d = int(rng.integers(1, max(2, n // 2)))
            A = rng.standard_normal((d, n))
            v = rng.uniform(0.2, 3.0, n)
            M = projection_product(A, v)
            k = int(rng.integers(1, n + 1))
            idx = np.sort(rng.choice(n, size=k, replace=False))
            dv = rng.uniform(-0.15, 1.0, k) * v[idx]
            out = woodbury_downdate(M, idx, np.diag(dv))
            v_new = v.copy()
            v_new[idx] += dv
            direct = projection_product(A, v_new)
            assert np.max(np.abs(out - direct)) <= 1e-8 * max(1.0, np.max(np.abs(direct)))

    def test_singular_capacitance_raises(self):
        rng = np.random.default_rng(16)
        A = rng.standard_normal((2, 4))
        v = np.ones(4)
        M = projection_product(A, v)
        idx = np.array([0, 1])
        M_SS = M[np.ix_(idx, idx)]
        # engineered so I + delta*M_SS annihilates a direction
        delta = -np.linalg.inv(M_SS)
        with pytest.raises(UpdateSingular):
            woodbury_downdate(M, idx, delta)
