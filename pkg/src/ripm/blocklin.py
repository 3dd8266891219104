"""Block-diagonal linear algebra and the dense kernels built on top of it.

This is the bottom layer of the solver: everything that touches a
block-diagonal PSD matrix (Hessians, their inverses, the maintained scalings)
or the normal matrix A V A^T goes through here.  Dense matrices are plain
numpy arrays throughout; block-diagonal ones get a small class so that block
structure, PSD tagging and the canonical block->flat index map live in one
place.

Blocks are tiny by design (dimension <= MAX_BLOCK_DIM); the uniform case
(all blocks the same size, in particular all scalar) is stored stacked so the
per-block operations vectorize.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULTS, MAX_BLOCK_DIM, Tolerances
from .errors import FactorizationFailure, SingularBlock, UpdateSingular

__all__ = [
    "BlockStructure",
    "BlockDiagMatrix",
    "block_quadform",
    "block_solve",
    "normal_matrix",
    "cholesky_factor",
    "cholesky_solve",
    "woodbury_downdate",
]


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockStructure:
    """Partition of R^n into m contiguous blocks of sizes n_i."""

    sizes: tuple[int, ...]

    def __init__(self, sizes: Iterable[int], max_block_dim: int = MAX_BLOCK_DIM):
        sizes = tuple(int(s) for s in sizes)
        if not sizes:
            raise ValueError("empty block structure")
        for s in sizes:
            if s < 1:
                raise ValueError(f"block size {s} must be >= 1")
            if s > max_block_dim:
                raise ValueError(f"block size {s} exceeds max_block_dim={max_block_dim}")
        object.__setattr__(self, "sizes", sizes)

    @cached_property
    def offsets(self) -> np.ndarray:
        """Prefix sums; offsets[i] is where block i starts, offsets[m] == n."""
        return np.concatenate([[0], np.cumsum(self.sizes)])

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def uniform(self) -> bool:
        return len(set(self.sizes)) == 1

    @cached_property
    def block_of(self) -> np.ndarray:
        """Map flat coordinate -> owning block index."""
        return np.repeat(np.arange(self.m), self.sizes)

    def slice(self, i: int) -> slice:
        off = self.offsets
        return slice(int(off[i]), int(off[i + 1]))

    def flat_indices(self, S: Sequence[int]) -> np.ndarray:
        """Canonical flat index list for a block set: sorted block order, concatenated."""
        out = []
        for i in sorted(int(j) for j in S):
            out.extend(range(int(self.offsets[i]), int(self.offsets[i + 1])))
        return np.asarray(out, dtype=np.int64)


# ---------------------------------------------------------------------------
# block-diagonal matrices
# ---------------------------------------------------------------------------

class BlockDiagMatrix:
    """Symmetric block-diagonal matrix stored as stacked per-block arrays.

    Internally a single (m, k, k) stack when the structure is uniform, else a
    list of (n_i, n_i) arrays.  All arithmetic helpers return new objects;
    nothing here mutates in place except `set_block`.
    """

    def __init__(self, structure: BlockStructure, blocks: Sequence[np.ndarray],
                 check: bool = False, tol: Tolerances = DEFAULTS):
        if len(blocks) != structure.m:
            raise ValueError(f"expected {structure.m} blocks, got {len(blocks)}")
        self.structure = structure
        self._blocks = [np.ascontiguousarray(b, dtype=float) for b in blocks]
        for i, b in enumerate(self._blocks):
            ni = structure.sizes[i]
            if b.shape != (ni, ni):
                raise ValueError(f"block {i} has shape {b.shape}, expected {(ni, ni)}")
        if check:
            self.check_symmetric(tol.sym_tol)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, structure: BlockStructure) -> "BlockDiagMatrix":
        return cls(structure, [np.eye(s) for s in structure.sizes])

    @classmethod
    def from_diag(cls, structure: BlockStructure, d: np.ndarray) -> "BlockDiagMatrix":
        """Diagonal matrix laid out per block (works for any block sizes)."""
        d = np.asarray(d, dtype=float)
        if d.shape != (structure.n,):
            raise ValueError("diagonal length mismatch")
        return cls(structure, [np.diag(d[structure.slice(i)])
                               for i in range(structure.m)])

    def copy(self) -> "BlockDiagMatrix":
        return BlockDiagMatrix(self.structure, [b.copy() for b in self._blocks])

    # -- access ------------------------------------------------------------

    def block(self, i: int) -> np.ndarray:
        return self._blocks[i]

    def set_block(self, i: int, value: np.ndarray) -> None:
        ni = self.structure.sizes[i]
        value = np.ascontiguousarray(value, dtype=float)
        if value.shape != (ni, ni):
            raise ValueError("block shape mismatch")
        self._blocks[i] = value
        self.__dict__.pop("_stack_cache", None)

    @property
    def blocks(self) -> list[np.ndarray]:
        return self._blocks

    def stack(self) -> np.ndarray:
        """(m, k, k) view of the blocks; uniform structures only."""
        if not self.structure.uniform:
            raise ValueError("stack() requires a uniform block structure")
        cache = self.__dict__.get("_stack_cache")
        if cache is None:
            cache = np.stack(self._blocks)
            self.__dict__["_stack_cache"] = cache
        return cache

    def diag_vector(self) -> np.ndarray:
        """Flat diagonal; exact representation when all blocks are 1x1."""
        return np.concatenate([np.diag(b) for b in self._blocks])

    def to_dense(self) -> np.ndarray:
        n = self.structure.n
        out = np.zeros((n, n))
        for i, b in enumerate(self._blocks):
            sl = self.structure.slice(i)
            out[sl, sl] = b
        return out

    # -- checks ------------------------------------------------------------

    def check_symmetric(self, sym_tol: float) -> None:
        for i, b in enumerate(self._blocks):
            if b.size and np.max(np.abs(b - b.T)) > sym_tol * max(1.0, np.max(np.abs(b))):
                raise ValueError(f"block {i} is not symmetric to tolerance {sym_tol}")

    def min_eigenvalues(self) -> np.ndarray:
        return np.array([np.linalg.eigvalsh(b)[0] for b in self._blocks])

    def is_psd(self, psd_tol: float = DEFAULTS.psd_tol) -> bool:
        return bool(np.all(self.min_eigenvalues() >= -psd_tol))

    # -- arithmetic --------------------------------------------------------

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Matrix-vector product H v."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.structure.n,):
            raise ValueError("vector length mismatch")
        if self.structure.uniform:
            k = self.structure.sizes[0]
            if k == 1:
                return self.stack()[:, 0, 0] * v
            vb = v.reshape(self.structure.m, k)
            return np.einsum("mij,mj->mi", self.stack(), vb).ravel()
        out = np.empty_like(v)
        for i in range(self.structure.m):
            sl = self.structure.slice(i)
            out[sl] = self._blocks[i] @ v[sl]
        return out

    def solve(self, v: np.ndarray, pd_tol: float = DEFAULTS.pd_tol) -> np.ndarray:
        return block_solve(self, v, pd_tol=pd_tol)

    def matmul_blockwise(self, other: "BlockDiagMatrix") -> "BlockDiagMatrix":
        self._require_same_structure(other)
        return BlockDiagMatrix(self.structure,
                               [a @ b for a, b in zip(self._blocks, other._blocks)])

    def add(self, other: "BlockDiagMatrix") -> "BlockDiagMatrix":
        self._require_same_structure(other)
        return BlockDiagMatrix(self.structure,
                               [a + b for a, b in zip(self._blocks, other._blocks)])

    def sub(self, other: "BlockDiagMatrix") -> "BlockDiagMatrix":
        self._require_same_structure(other)
        return BlockDiagMatrix(self.structure,
                               [a - b for a, b in zip(self._blocks, other._blocks)])

    def scale(self, c: float) -> "BlockDiagMatrix":
        return BlockDiagMatrix(self.structure, [c * b for b in self._blocks])

    def sqrt(self) -> "BlockDiagMatrix":
        """Symmetric PSD square root, blockwise (eigendecomposition)."""
        roots = []
        for i, b in enumerate(self._blocks):
            if b.shape == (1, 1):
                if b[0, 0] < 0:
                    raise SingularBlock(i, "negative scalar block in sqrt")
                roots.append(np.sqrt(b))
                continue
            w, U = np.linalg.eigh(b)
            if w[0] < -DEFAULTS.psd_tol * max(1.0, abs(w[-1])):
                raise SingularBlock(i, f"negative eigenvalue {w[0]:.3e} in sqrt")
            roots.append((U * np.sqrt(np.clip(w, 0.0, None))) @ U.T)
        return BlockDiagMatrix(self.structure, roots)

    def inv(self, pd_tol: float = DEFAULTS.pd_tol) -> "BlockDiagMatrix":
        inv_blocks = []
        for i, b in enumerate(self._blocks):
            if b.shape == (1, 1):
                if b[0, 0] <= pd_tol:
                    raise SingularBlock(i, f"scalar block {b[0, 0]:.3e} <= pd_tol")
                inv_blocks.append(1.0 / b)
                continue
            w = np.linalg.eigvalsh(b)
            if w[0] <= pd_tol:
                raise SingularBlock(i, f"min eigenvalue {w[0]:.3e} <= pd_tol")
            inv_blocks.append(np.linalg.inv(b))
        return BlockDiagMatrix(self.structure, inv_blocks)

    # -- per-block reductions ---------------------------------------------

    def quadform_norms(self, v: np.ndarray) -> np.ndarray:
        """Vector of per-block norms (v_i^T H_i v_i)^{1/2}."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.structure.n,):
            raise ValueError("vector length mismatch")
        if self.structure.uniform:
            k = self.structure.sizes[0]
            vb = v.reshape(self.structure.m, k)
            if k == 1:
                q = self.stack()[:, 0, 0] * vb[:, 0] ** 2
            else:
                q = np.einsum("mi,mij,mj->m", vb, self.stack(), vb)
            return np.sqrt(np.clip(q, 0.0, None))
        out = np.empty(self.structure.m)
        for i in range(self.structure.m):
            sl = self.structure.slice(i)
            out[i] = np.sqrt(max(float(v[sl] @ self._blocks[i] @ v[sl]), 0.0))
        return out

    def frobenius_norms(self) -> np.ndarray:
        if self.structure.uniform:
            return np.sqrt(np.sum(self.stack() ** 2, axis=(1, 2)))
        return np.array([np.linalg.norm(b) for b in self._blocks])

    def _require_same_structure(self, other: "BlockDiagMatrix") -> None:
        if other.structure.sizes != self.structure.sizes:
            raise ValueError("block structures differ")


# ---------------------------------------------------------------------------
# free-function kernels
# ---------------------------------------------------------------------------

def block_quadform(H: BlockDiagMatrix, v: np.ndarray, i: int) -> float:
    """Local norm (v^T H_i v)^{1/2} of a per-block vector v of length n_i."""
    v = np.asarray(v, dtype=float)
    ni = H.structure.sizes[i]
    if v.shape != (ni,):
        raise ValueError(f"vector has shape {v.shape}, block {i} needs ({ni},)")
    q = float(v @ H.block(i) @ v)
    return float(np.sqrt(max(q, 0.0)))


def block_solve(H: BlockDiagMatrix, v: np.ndarray,
                pd_tol: float = DEFAULTS.pd_tol) -> np.ndarray:
    """H^{-1} v for a positive-definite block-diagonal H.

    Raises SingularBlock (with the offending block index) when a block's
    minimum eigenvalue is at or below pd_tol.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (H.structure.n,):
        raise ValueError("vector length mismatch")
    st = H.structure
    if st.uniform and st.sizes[0] == 1:
        d = H.stack()[:, 0, 0]
        bad = np.nonzero(d <= pd_tol)[0]
        if bad.size:
            raise SingularBlock(int(bad[0]), f"diagonal entry {d[bad[0]]:.3e}")
        return v / d
    out = np.empty_like(v)
    for i in range(st.m):
        sl = st.slice(i)
        b = H.block(i)
        if b.shape == (1, 1):
            if b[0, 0] <= pd_tol:
                raise SingularBlock(i, f"scalar block {b[0, 0]:.3e}")
            out[sl] = v[sl] / b[0, 0]
            continue
        w = np.linalg.eigvalsh(b)
        if w[0] <= pd_tol:
            raise SingularBlock(i, f"min eigenvalue {w[0]:.3e}")
        out[sl] = np.linalg.solve(b, v[sl])
    return out


def normal_matrix(A: np.ndarray, V: BlockDiagMatrix) -> np.ndarray:
    """Symmetric normal matrix A V A^T (d x d)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != V.structure.n:
        raise ValueError(f"A has shape {A.shape}, expected (d, {V.structure.n})")
    st = V.structure
    if st.uniform and st.sizes[0] == 1:
        AV = A * V.stack()[:, 0, 0]
    else:
        AV = np.empty_like(A)
        for i in range(st.m):
            sl = st.slice(i)
            AV[:, sl] = A[:, sl] @ V.block(i)
    S = AV @ A.T
    return 0.5 * (S + S.T)


def cholesky_factor(S: np.ndarray, tol: Tolerances = DEFAULTS) -> np.ndarray:
    """Lower Cholesky factor of an SPD matrix, with jitter escalation.

    Retries with diagonal jitter tol.jitter_base*trace/d, growing by
    tol.jitter_growth, up to tol.jitter_retries times; then raises
    FactorizationFailure.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("square matrix required")
    d = S.shape[0]
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        pass
    jitter = tol.jitter_base * max(np.trace(S), 1.0) / max(d, 1)
    for _ in range(tol.jitter_retries):
        try:
            return np.linalg.cholesky(S + jitter * np.eye(d))
        except np.linalg.LinAlgError:
            jitter *= tol.jitter_growth
    raise FactorizationFailure(
        f"Cholesky failed on {d}x{d} matrix after {tol.jitter_retries} jitter retries")


def cholesky_solve(S: np.ndarray, B: np.ndarray,
                   tol: Tolerances = DEFAULTS) -> np.ndarray:
    """S^{-1} B via Cholesky (with the same jitter policy as cholesky_factor)."""
    L = cholesky_factor(S, tol)
    B = np.asarray(B, dtype=float)
    squeeze = B.ndim == 1
    if squeeze:
        B = B[:, None]
    from scipy.linalg import solve_triangular
    Y = solve_triangular(L, B, lower=True, check_finite=False)
    X = solve_triangular(L.T, Y, lower=False, check_finite=False)
    return X[:, 0] if squeeze else X


def woodbury_downdate(M: np.ndarray, idx: np.ndarray, delta: np.ndarray,
                      cond_limit: float = 1e14, return_capacitance: bool = False):
    """Low-rank correction of a maintained projection-style inverse product.

    Given M = A^T (A V A^T)^{-1} A and a symmetric perturbation `delta`
    supported on the flat indices `idx` (so V_new = V + delta there), returns
    A^T (A V_new A^T)^{-1} A without refactorizing:

        M_new = M - M[:, idx] (I + delta M[idx, idx])^{-1} delta M[idx, :]

    This is algebraically the textbook form with (delta^{-1} + M_SS)^{-1} but
    stays well-defined when delta has zero or singular sub-blocks.  Raises
    UpdateSingular when the capacitance matrix I + delta M_SS is not
    invertible to working precision; callers fall back to recomputation.

    With return_capacitance=True also returns K = (I + delta M_SS)^{-1} delta,
    so callers maintaining products of M (e.g. sketched copies) can apply the
    same rank-k correction without re-deriving it.
    """
    M = np.asarray(M, dtype=float)
    idx = np.asarray(idx, dtype=np.int64)
    k = idx.size
    if k == 0:
        return (M.copy(), np.zeros((0, 0))) if return_capacitance else M.copy()
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (k, k):
        raise ValueError(f"delta has shape {delta.shape}, expected ({k}, {k})")
    M_SS = M[np.ix_(idx, idx)]
    cap = np.eye(k) + delta @ M_SS
    # singularity guard: the capacitance matrix contains I, so its natural
    # scale is >= 1; a smallest singular value far below that means the
    # update direction is lost and the caller must refactorize.
    sv = np.linalg.svd(cap, compute_uv=False)
    if sv[-1] <= max(1.0, sv[0]) / cond_limit:
        raise UpdateSingular(
            f"capacitance smallest singular value {sv[-1]:.3e} below scale")
    try:
        K = np.linalg.solve(cap, delta)
    except np.linalg.LinAlgError as e:  # pragma: no cover - guarded above
        raise UpdateSingular(str(e)) from e
    if not np.all(np.isfinite(K)):
        raise UpdateSingular("capacitance solve produced non-finite entries")
    M_cols = M[:, idx]
    out = M - M_cols @ K @ M_cols.T
    out = 0.5 * (out + out.T)
    return (out, K) if return_capacitance else out
