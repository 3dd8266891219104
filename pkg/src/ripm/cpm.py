"""Lazily updated projection maintenance for kernel-direction stepping.

The solver repeatedly moves its primal iterate inside ker(A) along directions
of the form

    delta_x = Vt h - Vt A^T (A Vt A^T)^{-1} A Vt h,

where Vt is a block-diagonal scaling that tracks the inverse barrier Hessian.
Refactorizing (A Vt A^T)^{-1} every step is the dominant cost of a naive
implementation, but the scaling drifts slowly: most steps change only a few
blocks beyond tolerance.  This module maintains

    M = A^T (A V A^T)^{-1} A          (for a lagged scaling V), and
    Q = R sqrt(V) M                   (a bank of sketched copies of M),

and repairs them with low-rank corrections instead of refactorizing.  The
iterates themselves are stored implicitly as

    x = u1 + Vt M u2,     s = u3 + M u4,

so that a step costs a handful of O(n) vector updates plus an O(b n) sketch
application; cheap explicit approximations (x_bar, s_bar) absorb the sketched
step estimates and are what the solver actually reads each iteration.

Three scalings coexist:

    W_bar   the target handed in by the caller (inverse Hessian at x_bar),
    V       the lagged scaling baked into M and Q,
    Vt      V with the blocks that drifted beyond eps_mp replaced by W_bar.

`update` keeps the sandwich (1 - eps_mp) Vt <= W_bar <= (1 + eps_mp) Vt true
for every block, batching repairs of V so that fewer than n^a blocks ever
differ between Vt and V.  `multiply_move` applies a step through Vt, fixing
up the V-vs-Vt mismatch with a small capacitance solve on the drifted blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
import scipy.linalg

from .blocklin import (
    BlockDiagMatrix,
    cholesky_solve,
    normal_matrix,
    woodbury_downdate,
)
from .config import DEFAULTS, bank_count_default, eps_mp_default, sketch_width_default
from .errors import UpdateSingular
from .sketch import SketchBank, child_seed, create_bank, identity_bank

__all__ = [
    "CentralPathMaintenance",
    "PsiConfig",
    "UpdateInfo",
    "initialize",
    "psi_envelope",
    "psi_envelope_derivative",
    "rank_paired_relative_gap",
]

_SANDWICH_SLACK = 1e-12


# ---------------------------------------------------------------------------
# update-potential observability: envelope psi, weights g
# ---------------------------------------------------------------------------

def psi_envelope(r, eps_mp: float):
    """Clamped quadratic envelope of a drift magnitude r >= 0.

    Quadratic r^2/(2 eps) up to eps, a quartic shoulder on (eps, 2 eps], and
    constant eps beyond; bounded derivative everywhere, so the associated
    block potential is insensitive to drift past 2 eps.
    """
    r = np.abs(np.asarray(r, dtype=float))
    e = float(eps_mp)
    if e <= 0.0:
        raise ValueError("eps_mp must be positive for the envelope")
    shoulder = e - (4.0 * e**2 - r**2) ** 2 / (18.0 * e**3)
    out = np.where(r <= e, r**2 / (2.0 * e), np.where(r <= 2.0 * e, shoulder, e))
    return float(out) if out.ndim == 0 else out


def psi_envelope_derivative(r, eps_mp: float):
    """d/dr of `psi_envelope` (one-sided at the eps breakpoint)."""
    r = np.abs(np.asarray(r, dtype=float))
    e = float(eps_mp)
    if e <= 0.0:
        raise ValueError("eps_mp must be positive for the envelope")
    shoulder = 2.0 * r * (4.0 * e**2 - r**2) / (9.0 * e**3)
    out = np.where(r <= e, r / e, np.where(r <= 2.0 * e, shoulder, 0.0))
    return float(out) if out.ndim == 0 else out


def rank_paired_relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest relative gap after pairing two positive sequences by rank.

    Sorts both sequences descending and returns max_i |a_(i) - b_(i)| / a_(i).
    Rank pairing never exceeds the worst coordinate-wise relative gap, a fact
    the update analysis leans on and the property tests exercise.
    """
    a = np.sort(np.asarray(a, dtype=float))[::-1]
    b = np.sort(np.asarray(b, dtype=float))[::-1]
    if a.shape != b.shape or a.size == 0:
        raise ValueError("need two equal-length nonempty sequences")
    if np.any(a <= 0.0):
        raise ValueError("sequences must be positive")
    return float(np.max(np.abs(a - b) / a))


@dataclass(frozen=True)
class PsiConfig:
    """Weights and envelope for the logged per-update drift potential.

    Purely observational: no update decision reads this value.  The weight of
    rank i (1-based, blocks sorted by descending drift) is flat n^{-a} for the
    first n^a ranks and polynomial in the rank beyond.
    """

    eps_mp: float
    batch_exponent: float
    omega: float = 2.38

    def __post_init__(self) -> None:
        if not (0.0 < self.batch_exponent < 1.0):
            raise ValueError("batch exponent must lie in (0, 1)")
        if self.eps_mp <= 0.0:
            raise ValueError("eps_mp must be positive")

    def psi(self, block: np.ndarray) -> float:
        """Envelope applied to the Frobenius norm of a drift block."""
        return psi_envelope(np.linalg.norm(np.atleast_2d(block)), self.eps_mp)

    def g_weights(self, count: int, n: int) -> np.ndarray:
        a, w = self.batch_exponent, self.omega
        ranks = np.arange(1, count + 1, dtype=float)
        power = (w - 2.0) / (1.0 - a)
        tail = ranks**power * float(n) ** (-a * power)
        return np.where(ranks < float(n) ** a, float(n) ** (-a), tail)

    def potential(self, drift_norms: np.ndarray, n: int) -> float:
        norms = np.sort(np.asarray(drift_norms, dtype=float))[::-1]
        g = self.g_weights(norms.size, n)
        return float(np.sum(g * psi_envelope(norms, self.eps_mp)))


# ---------------------------------------------------------------------------
# small dense/block helpers
# ---------------------------------------------------------------------------

def _times_blockdiag(X: np.ndarray, B: BlockDiagMatrix) -> np.ndarray:
    """X @ B for dense X and block-diagonal B, without densifying B."""
    st = B.structure
    if st.uniform and st.sizes[0] == 1:
        return X * B.stack()[:, 0, 0][None, :]
    out = np.empty_like(X)
    for i in range(st.m):
        sl = st.slice(i)
        out[:, sl] = X[:, sl] @ B.block(i)
    return out


def _subset_dense(B: BlockDiagMatrix, blocks: Sequence[int]) -> np.ndarray:
    """Dense block-diagonal matrix of the chosen blocks (in ascending order)."""
    mats = [B.block(i) for i in blocks]
    if not mats:
        return np.zeros((0, 0))
    return scipy.linalg.block_diag(*mats)


def _sqrt_block(b: np.ndarray) -> np.ndarray:
    if b.shape == (1, 1):
        return np.sqrt(b)
    w, U = np.linalg.eigh(b)
    return (U * np.sqrt(np.clip(w, 0.0, None))) @ U.T


def _isqrt_block(b: np.ndarray) -> np.ndarray:
    if b.shape == (1, 1):
        return 1.0 / np.sqrt(b)
    w, U = np.linalg.eigh(b)
    return (U / np.sqrt(w)) @ U.T


def _sandwich_ok(w_blk: np.ndarray, v_blk: np.ndarray, eps: float) -> bool:
    """Whether (1-eps) v <= w <= (1+eps) v in the PSD order."""
    lo, hi = 1.0 - eps - _SANDWICH_SLACK, 1.0 + eps + _SANDWICH_SLACK
    if w_blk.shape == (1, 1):
        ratio = w_blk[0, 0] / v_blk[0, 0]
        return lo <= ratio <= hi
    lam = scipy.linalg.eigh(w_blk, v_blk, eigvals_only=True)
    return lam[0] >= lo and lam[-1] <= hi


def _relative_drift_norms(w_new: BlockDiagMatrix, V: BlockDiagMatrix) -> np.ndarray:
    """Per-block Frobenius norm of v^{-1/2} w v^{-1/2} - I."""
    st = V.structure
    if st.uniform and st.sizes[0] == 1:
        return np.abs(w_new.stack()[:, 0, 0] / V.stack()[:, 0, 0] - 1.0)
    out = np.empty(st.m)
    for i in range(st.m):
        v, w = V.block(i), w_new.block(i)
        if v.shape == (1, 1):
            out[i] = abs(w[0, 0] / v[0, 0] - 1.0)
            continue
        iv = _isqrt_block(v)
        out[i] = np.linalg.norm(iv @ w @ iv - np.eye(v.shape[0]))
    return out


@dataclass
class UpdateInfo:
    """Per-update diagnostics record for the iteration log."""

    r: int
    branch: str                      # "partial" | "full"
    drift_size: int                  # |{blocks with Vt != V}| after the update
    rebuilt: bool                    # True when a fallback reinitialized state
    psi_potential: float
    xbar_error: Optional[float] = None   # ||x_bar - x||_{Vt^{-1}}, if measured


# ---------------------------------------------------------------------------
# the data structure
# ---------------------------------------------------------------------------

class CentralPathMaintenance:
    """Maintains M = A^T (A V A^T)^{-1} A and implicit iterates under drift.

    Public surface: `update` (retarget the scaling), `multiply_move` (apply a
    step at path parameter t), `query` (read the explicit approximations) and
    `exact_iterates` (materialize the implicit ones).  See the module
    docstring for the representation.
    """

    def __init__(self, A: np.ndarray, x: np.ndarray, s: np.ndarray,
                 W: BlockDiagMatrix, eps_mp: Optional[float] = None,
                 a: float = 0.31, b: Optional[int] = None, seed: int = 0,
                 *, bank_count: Optional[int] = None,
                 identity_sketch: bool = False, diagnostics: bool = False):
        self.A = np.ascontiguousarray(A, dtype=float)
        self.structure = W.structure
        n = self.structure.n
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise ValueError(f"A has shape {self.A.shape}, expected (d, {n})")
        x = np.asarray(x, dtype=float)
        s = np.asarray(s, dtype=float)
        if x.shape != (n,) or s.shape != (n,):
            raise ValueError("x and s must be n-vectors")
        # eps_mp = 0 is allowed as a test configuration: every block is then
        # repaired every update and the structure tracks the target exactly.
        self.eps_mp = eps_mp_default(n) if eps_mp is None else float(eps_mp)
        if not (0.0 <= self.eps_mp < 0.25):
            raise ValueError("eps_mp must lie in [0, 1/4)")
        if not (0.0 < a < 1.0):
            raise ValueError("batch exponent a must lie in (0, 1)")
        self.a = float(a)
        self.b = sketch_width_default(n) if b is None else int(b)
        if not identity_sketch and not (1 <= self.b <= n):
            raise ValueError(f"sketch width must lie in [1, {n}]")
        self.bank_count = bank_count_default(n) if bank_count is None else int(bank_count)
        if self.bank_count < 1:
            raise ValueError("bank_count must be >= 1")
        self.identity_sketch = bool(identity_sketch)
        if self.identity_sketch:
            self.b = n
        self.seed = int(seed)
        self.diagnostics = bool(diagnostics)
        self.psi_config = PsiConfig(eps_mp=max(self.eps_mp, 1e-12),
                                    batch_exponent=self.a)

        self.epoch = 0               # number of bank generations drawn so far
        self.total_rebuilds = 0      # Move resets + singular-update fallbacks
        self.t_cur: Optional[float] = None
        self.last_update: Optional[UpdateInfo] = None
        self._reset(x, s, W, t_pre=None)

    # -- lifecycle ---------------------------------------------------------

    def _reset(self, x: np.ndarray, s: np.ndarray, W: BlockDiagMatrix,
               t_pre: Optional[float]) -> None:
        """(Re)build every maintained quantity exactly at the given iterates."""
        self.W_bar = W.copy()
        self.V = W.copy()
        self.V_tilde = W.copy()
        self._drift = np.zeros(0, dtype=np.int64)
        self._vt_sqrt = BlockDiagMatrix(
            self.structure, [_sqrt_block(blk) for blk in self.V_tilde.blocks])
        self._vt_isqrt = BlockDiagMatrix(
            self.structure, [_isqrt_block(blk) for blk in self.V_tilde.blocks])

        S = normal_matrix(self.A, self.V)
        M = self.A.T @ cholesky_solve(S, self.A)
        self.M = 0.5 * (M + M.T)

        if self.identity_sketch:
            self.bank: SketchBank = identity_bank(self.structure.n, self.bank_count)
        else:
            self.bank = create_bank(self.b, self.structure.n, self.bank_count,
                                    child_seed(self.seed, self.epoch))
        self.epoch += 1
        self._R2 = np.ascontiguousarray(self.bank.entries).reshape(
            self.bank_count * self.b, self.structure.n)
        self.Q = _times_blockdiag(self._R2, self._vt_sqrt) @ self.M

        self.u1 = np.array(x, dtype=float)
        self.u2 = np.zeros(self.structure.n)
        self.u3 = np.array(s, dtype=float)
        self.u4 = np.zeros(self.structure.n)
        self.x_bar = np.array(x, dtype=float)
        self.s_bar = np.array(s, dtype=float)
        self.t_pre = t_pre

    # -- reads -------------------------------------------------------------

    def query(self) -> tuple[np.ndarray, np.ndarray]:
        """The explicit approximations (x_bar, s_bar); non-mutating, O(n)."""
        return self.x_bar.copy(), self.s_bar.copy()

    def exact_iterates(self) -> tuple[np.ndarray, np.ndarray]:
        """Materialize the implicit iterates (x, s); costs two M-multiplies."""
        x = self.u1 + self.V_tilde.apply(self.M @ self.u2)
        s = self.u3 + self.M @ self.u4
        return x, s

    @property
    def drift_blocks(self) -> np.ndarray:
        """Indices of blocks where Vt currently differs from V (sorted)."""
        return self._drift.copy()

    # -- scaling updates ---------------------------------------------------

    def update(self, w_new: BlockDiagMatrix) -> UpdateInfo:
        """Retarget the scaling to w_new, repairing V/Vt/M/Q as needed.

        Afterwards every block satisfies the eps_mp sandwich around Vt.  Small
        drifts (< n^a violating blocks) only retouch Vt; larger ones fold the
        drifted blocks into V with a rank-limited correction of M and Q.
        Returns the diagnostics record (also kept in `last_update`).
        """
        if w_new.structure.sizes != self.structure.sizes:
            raise ValueError("block structure mismatch in update")
        norms = _relative_drift_norms(w_new, self.V)
        r = int(np.sum(norms >= self.eps_mp))
        if r < self.structure.m ** self.a:
            rebuilt = self._partial_update(w_new)
            branch = "partial"
        else:
            rebuilt = self._full_update(w_new, norms)
            branch = "full"
        info = UpdateInfo(
            r=r, branch=branch, drift_size=int(self._drift.size),
            rebuilt=rebuilt,
            psi_potential=self.psi_config.potential(norms, self.structure.n))
        if self.diagnostics:
            x, _ = self.exact_iterates()
            info.xbar_error = float(
                np.linalg.norm(self._vt_isqrt.apply(self.x_bar - x)))
        self.last_update = info
        return info

    def _retarget_vt(self, w_new: BlockDiagMatrix) -> list[int]:
        """Set Vt := V where w_new is sandwich-close to V, else w_new.

        Returns the blocks whose Vt block actually changed and refreshes the
        drift set and the sqrt caches.  Callers rebase u1 against the change.
        """
        changed: list[int] = []
        drift: list[int] = []
        for i in range(self.structure.m):
            v_blk, w_blk = self.V.block(i), w_new.block(i)
            if _sandwich_ok(w_blk, v_blk, self.eps_mp):
                target = v_blk
            else:
                target = w_blk
                drift.append(i)
            if not np.array_equal(self.V_tilde.block(i), target):
                changed.append(i)
                self.V_tilde.set_block(i, target.copy())
                self._vt_sqrt.set_block(i, _sqrt_block(target))
                self._vt_isqrt.set_block(i, _isqrt_block(target))
        self._drift = np.asarray(drift, dtype=np.int64)
        return changed

    def _sub_rows(self, blocks: Sequence[int]) -> Iterator[tuple[int, slice, slice]]:
        """Yield (block, rows within the flat subset, rows within [n])."""
        off = 0
        for i in blocks:
            size = self.structure.sizes[i]
            yield i, slice(off, off + size), self.structure.slice(i)
            off += size

    def _partial_update(self, w_new: BlockDiagMatrix) -> bool:
        vt_old = {i: self.V_tilde.block(i) for i in range(self.structure.m)}
        changed = self._retarget_vt(w_new)
        if changed:
            Sf = self.structure.flat_indices(changed)
            mu2_S = self.M[Sf, :] @ self.u2
            for i, sub, full in self._sub_rows(changed):
                delta = vt_old[i] - self.V_tilde.block(i)
                self.u1[full] += delta @ mu2_S[sub]
                # refresh the explicit copies where the norm just changed
                self.x_bar[full] = self.u1[full] + self.V_tilde.block(i) @ mu2_S[sub]
            self.s_bar[Sf] = self.u3[Sf] + self.M[Sf, :] @ self.u4
        self.W_bar = w_new.copy()
        return False

    def _full_update(self, w_new: BlockDiagMatrix, norms: np.ndarray) -> bool:
        m = self.structure.m
        order = np.argsort(-norms, kind="stable")
        r = int(np.sum(norms >= self.eps_mp))
        # soft-threshold expansion: while the drift profile is flat at the
        # cut, push the cut out so nearly-as-stale blocks ride along
        if m > 1:
            slack = 1.0 - 1.0 / math.log(m)
            while r >= 1 and 1.5 * r < m:
                nxt = min(math.ceil(1.5 * r), m)
                if norms[order[nxt - 1]] < slack * norms[order[r - 1]]:
                    break
                r = nxt
        S = sorted(int(i) for i in order[:r])
        Sf = self.structure.flat_indices(S)

        mu2_old = self.M @ self.u2
        gu4_old = self.M @ self.u4
        f_u2_old = self.V_tilde.apply(mu2_old)

        if Sf.size:
            delta_d = _subset_dense(w_new, S) - _subset_dense(self.V, S)
            try:
                M_new, K = woodbury_downdate(self.M, Sf, delta_d,
                                             return_capacitance=True)
            except UpdateSingular:
                # scaling change not absorbable as a low-rank correction:
                # rebuild everything exactly at the current iterates
                x = self.u1 + f_u2_old
                s = self.u3 + gu4_old
                self._reset(x, s, w_new, t_pre=self.t_cur)
                self.total_rebuilds += 1
                return True
            gamma_d = np.zeros_like(delta_d)
            for i, sub, _ in self._sub_rows(S):
                gamma_d[sub, sub] = _sqrt_block(w_new.block(i)) - _sqrt_block(self.V.block(i))
            # both corrections read the pre-update Q and M
            self.Q = (self.Q
                      + (self._R2[:, Sf] @ gamma_d) @ M_new[Sf, :]
                      - self.Q[:, Sf] @ (K @ self.M[Sf, :]))
            self.M = M_new
            for i in S:
                self.V.set_block(i, w_new.block(i).copy())

        changed = self._retarget_vt(w_new)
        mu2_new = self.M @ self.u2
        gu4_new = self.M @ self.u4
        self.u1 += f_u2_old - self.V_tilde.apply(mu2_new)
        self.u3 += gu4_old - gu4_new
        # refresh the explicit copies wherever the norm just changed; the
        # exact products are already in hand at this point
        if changed:
            Cf = self.structure.flat_indices(changed)
            x_full = self.u1 + self.V_tilde.apply(mu2_new)
            s_full = self.u3 + gu4_new
            self.x_bar[Cf] = x_full[Cf]
            self.s_bar[Cf] = s_full[Cf]
        self.W_bar = w_new.copy()
        if self.t_cur is not None:
            self.t_pre = self.t_cur
        return False

    # -- stepping ----------------------------------------------------------

    def multiply_move(self, h: np.ndarray, t: float) -> None:
        """Apply the projected step for direction h at path parameter t.

        Implicitly performs  x += Vt h - Vt A^T (A Vt A^T)^{-1} A Vt h  and
        s += t A^T (A Vt A^T)^{-1} A Vt h  via the u-vectors, and adds a
        sketched estimate of the same step to (x_bar, s_bar).  When the sketch
        bank runs out or t has halved since the last rebuild, materializes the
        exact iterates and reinitializes, zeroing the accumulated estimate
        error.
        """
        h = np.asarray(h, dtype=float)
        if h.shape != (self.structure.n,):
            raise ValueError("direction must be an n-vector")
        if not (t > 0.0) or not np.isfinite(t):
            raise ValueError("path parameter t must be positive and finite")
        if self.t_cur is not None and t > self.t_cur * (1.0 + 1e-9):
            raise ValueError("path parameter must be non-increasing across steps")
        self.t_cur = float(t)
        if self.t_pre is None:
            self.t_pre = float(t)

        z = self.V_tilde.apply(h)
        try:
            correction, rhs_S, Sf = self._drift_correction(z)
        except UpdateSingular:
            # the drifted blocks made the capacitance system singular; fold
            # everything into a fresh exact state and retry with empty drift
            x, s = self.exact_iterates()
            self._reset(x, s, self.W_bar, t_pre=self.t_cur)
            self.total_rebuilds += 1
            z = self.V_tilde.apply(h)
            correction, rhs_S, Sf = self._drift_correction(z)

        step = z - correction
        self.u1 += z
        self.u2 -= step
        self.u4 += t * step

        delta_x, delta_s = self._sketched_deltas(z, correction, rhs_S, Sf, t)

        if self.bank.exhausted or t <= self.t_pre / 2.0:
            x, s = self.exact_iterates()
            self._reset(x, s, self.W_bar, t_pre=self.t_cur)
            self.total_rebuilds += 1
        else:
            self.x_bar += delta_x
            self.s_bar += delta_s

    def _drift_correction(self, z: np.ndarray):
        """Capacitance correction for the Vt-vs-V mismatch on drifted blocks.

        Returns (correction vector supported on the drifted rows, the rows
        M[S,:] z, and the flat drift indices); all empty when nothing drifts.
        """
        if not self._drift.size:
            return np.zeros_like(z), np.zeros(0), np.zeros(0, dtype=np.int64)
        S = [int(i) for i in self._drift]
        Sf = self.structure.flat_indices(S)
        delta_d = _subset_dense(self.V_tilde, S) - _subset_dense(self.V, S)
        rhs_S = self.M[Sf, :] @ z
        cap = np.eye(Sf.size) + delta_d @ self.M[np.ix_(Sf, Sf)]
        sv = np.linalg.svd(cap, compute_uv=False)
        if sv[-1] <= max(1.0, sv[0]) / 1e14:
            raise UpdateSingular(
                f"drift capacitance smallest singular value {sv[-1]:.3e}")
        delta_m = np.linalg.solve(cap, delta_d @ rhs_S)
        correction = np.zeros_like(z)
        correction[Sf] = delta_m
        return correction, rhs_S, Sf

    def _sketched_deltas(self, z: np.ndarray, correction: np.ndarray,
                         rhs_S: np.ndarray, Sf: np.ndarray, t: float):
        """Sketch-estimated explicit step (delta_x, delta_s) for one draw."""
        R_l = self.bank.take()
        row0 = (self.bank.cursor - 1) * self.b
        Q_l = self.Q[row0:row0 + self.b, :]
        # R_l sqrt(Vt) M z, assembled from Q = R sqrt(V) M plus the sqrt
        # mismatch on the drifted blocks
        term = Q_l @ z
        if Sf.size:
            S = [int(i) for i in self._drift]
            gamma_d = np.zeros((Sf.size, Sf.size))
            for i, sub, _ in self._sub_rows(S):
                gamma_d[sub, sub] = self._vt_sqrt.block(i) - _sqrt_block(self.V.block(i))
            RlG = R_l[:, Sf] @ gamma_d
            term += RlG @ rhs_S
            delta_m = correction[Sf]
            term -= Q_l[:, Sf] @ delta_m
            term -= RlG @ (self.M[np.ix_(Sf, Sf)] @ delta_m)
        w_est = R_l.T @ term
        delta_x = z - self._vt_sqrt.apply(w_est)
        delta_s = t * self._vt_isqrt.apply(w_est)
        return delta_x, delta_s


def initialize(A: np.ndarray, x: np.ndarray, s: np.ndarray, W: BlockDiagMatrix,
               eps_mp: Optional[float] = None, a: float = 0.31,
               b: Optional[int] = None, seed: int = 0,
               **kwargs) -> CentralPathMaintenance:
    """Build a maintenance structure with exact initial state (see class)."""
    return CentralPathMaintenance(A, x, s, W, eps_mp=eps_mp, a=a, b=b,
                                  seed=seed, **kwargs)
