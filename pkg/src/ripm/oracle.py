"""Ground-truth references for differential and acceptance testing.

Two independent sources of truth live here:

* ``dense_step`` / ``run_dense`` — the path-following iteration evaluated the
  expensive, obviously-correct way: exact iterates everywhere, a fresh
  factorization of A W A' per step, no sketches, no maintained state.  The
  production solver must reproduce this trajectory exactly when its sketch is
  the identity and its drift tolerance is zero.
* ``vertex_lp_solve`` — brute-force enumeration of basic feasible solutions
  for small LPs with (possibly one-sided) variable bounds.  It shares no code
  with the interior-point machinery, which is what makes the optimality
  cross-checks meaningful.

``drift_diagnostics`` measures how fast the inverse-Hessian blocks actually
move along a dense trace; the update schedule of the maintenance structure is
sized against exactly these quantities.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .barriers import BlockBarriers
from .blocklin import cholesky_solve, normal_matrix
from .config import DEFAULTS
from .errors import Infeasible, Unbounded
from .rcp import PathParams, centrality_errors, scaled_direction, softmax_potential

__all__ = [
    "DenseRow",
    "DenseTrace",
    "dense_step",
    "run_dense",
    "VertexSolution",
    "vertex_lp_solve",
    "DriftReport",
    "drift_diagnostics",
]

#: Combinatorial guard for vertex enumeration.
MAX_BASES = 2_000_000
MAX_VERTEX_VARS = 24


# ---------------------------------------------------------------------------
# dense reference stepping
# ---------------------------------------------------------------------------

@dataclass
class DenseRow:
    """State and step of one dense iteration (recorded before the step)."""

    x: np.ndarray
    s: np.ndarray
    t: float
    log_phi: float
    gammas: np.ndarray
    h: np.ndarray
    delta_x: np.ndarray
    delta_s: np.ndarray
    alphas: np.ndarray  # per-block local norms ||delta_x_i||_{x_i}


@dataclass
class DenseTrace:
    """Recorded dense trajectory with its built-in sanity checks."""

    A: np.ndarray
    rows: list[DenseRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def constraint_drift(self) -> float:
        """max over rows of ||A x_k - A x_0||_inf; zero in exact arithmetic."""
        if not self.rows:
            return 0.0
        ref = self.A @ self.rows[0].x
        return max(float(np.abs(self.A @ row.x - ref).max()) for row in self.rows)

    def step_norm_sums(self) -> np.ndarray:
        """sum_i alpha_i^2 per row (bounded by 4 alpha^2 along a stable path)."""
        return np.array([float(np.sum(row.alphas ** 2)) for row in self.rows])


def dense_step(x: np.ndarray, s: np.ndarray, t: float, params: PathParams,
               barriers: BlockBarriers, A: np.ndarray,
               ) -> tuple[np.ndarray, np.ndarray, DenseRow]:
    """One exact path iteration: weights, direction, and projected step.

    Computes h from (x, s) directly, then the equality-preserving split

        delta_x = W (h - A' u),   delta_s = t A' u,
        u = (A W A')^{-1} A W h,      W = (hess phi(x))^{-1},

    with (A W A')^{-1} applied through a fresh Cholesky factorization.
    A delta_x = 0 by construction, so Ax is invariant along the trace.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    w = barriers.hessian_inverse(x)
    mu_vec, gammas = centrality_errors(x, s, t, barriers, w)
    h = scaled_direction(mu_vec, gammas, params, barriers.structure)
    z = w.apply(h)
    u = cholesky_solve(normal_matrix(A, w), A @ z)
    back = A.T @ u
    delta_x = w.apply(h - back)
    delta_s = float(t) * back
    alphas = barriers.hessian(x).quadform_norms(delta_x)
    row = DenseRow(
        x=x.copy(), s=s.copy(), t=float(t),
        log_phi=softmax_potential(gammas, params.lam).log,
        gammas=gammas, h=h, delta_x=delta_x, delta_s=delta_s, alphas=alphas)
    return x + delta_x, s + delta_s, row


def run_dense(A: np.ndarray, x0: np.ndarray, s0: np.ndarray,
              params: PathParams, barriers: BlockBarriers, steps: int,
              t0: float = 1.0) -> DenseTrace:
    """Drive dense_step for a fixed number of iterations on the t schedule.

    Mirrors the production loop order: the step is applied at the current t,
    then t shrinks.  Stops early if t passes the termination level.
    """
    trace = DenseTrace(A=np.asarray(A, dtype=float))
    x, s, t = np.asarray(x0, dtype=float), np.asarray(s0, dtype=float), float(t0)
    for _ in range(steps):
        if t <= params.t_end:
            break
        x, s, row = dense_step(x, s, t, params, barriers, A)
        trace.rows.append(row)
        t *= params.shrink
    return trace


# ---------------------------------------------------------------------------
# brute-force LP oracle
# ---------------------------------------------------------------------------

class VertexSolution(NamedTuple):
    x: np.ndarray
    objective: float
    basis: tuple[int, ...]


def _normalize_bounds(bounds, n: int) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(bounds, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (n, 1))
    if arr.shape != (n, 2):
        raise ValueError(f"bounds have shape {arr.shape}, expected ({n}, 2)")
    lo, hi = arr[:, 0], arr[:, 1]
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    return lo, hi


def vertex_lp_solve(A: np.ndarray, b: np.ndarray, c: np.ndarray,
                    bounds) -> VertexSolution:
    """Exact optimum of min c'x s.t. Ax = b, lo <= x <= hi, by enumeration.

    Every vertex of the feasible polytope is a basic solution: d linearly
    independent basic columns, each nonbasic variable at one of its finite
    bounds.  All bases and bound patterns are enumerated (vectorized per
    basis), guarded by a combinatorial budget.  Bounds may be infinite on
    either side; a variable with no finite bound can never be nonbasic.

    Raises Infeasible when no basic solution satisfies the bounds and
    Unbounded when the recession cone contains an improving ray.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    d, n = A.shape
    lo, hi = _normalize_bounds(bounds, n)
    if n > MAX_VERTEX_VARS:
        raise ValueError(f"n={n} exceeds the enumeration limit {MAX_VERTEX_VARS}")
    if d < 1 or d > n:
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if comb(n, d) * 2 ** (n - d) > MAX_BASES:
        raise ValueError("combinatorial budget exceeded; shrink the instance")

    if np.any(~np.isfinite(lo) | ~np.isfinite(hi)):
        _check_bounded(A, c, lo, hi)

    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    feas_tol = 1e-9 * scale
    sing_tol = DEFAULTS.rank_tol * max(1.0, float(np.abs(A).max()))
    best: Optional[VertexSolution] = None

    for basis in itertools.combinations(range(n), d):
        B = np.array(basis)
        N = np.setdiff1d(np.arange(n), B, assume_unique=True)
        # nonbasic variables must rest on a finite bound
        options = []
        impossible = False
        for j in N:
            opts = [v for v in (lo[j], hi[j]) if math.isfinite(v)]
            if not opts:
                impossible = True
                break
            if len(opts) == 2 and opts[0] == opts[1]:
                opts = opts[:1]
            options.append(opts)
        if impossible:
            continue
        try:
            with warnings.catch_warnings():
                # singular bases are expected; the diagonal check below skips them
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu, piv = scipy.linalg.lu_factor(A[:, B])
        except scipy.linalg.LinAlgError:
            continue
        if np.abs(np.diag(lu)).min(initial=np.inf) <= sing_tol:
            continue
        if N.size:
            patterns = np.array(list(itertools.product(*options)))
            rhs = b[:, None] - A[:, N] @ patterns.T
        else:
            patterns = np.zeros((1, 0))
            rhs = b[:, None]
        xb = scipy.linalg.lu_solve((lu, piv), rhs)  # d x num_patterns
        ok = np.all((xb >= lo[B, None] - feas_tol) & (xb <= hi[B, None] + feas_tol),
                    axis=0)
        if not ok.any():
            continue
        objs = c[B] @ xb + (patterns @ c[N] if N.size else 0.0)
        k = int(np.argmin(np.where(ok, objs, np.inf)))
        if best is None or objs[k] < best.objective:
            x = np.empty(n)
            x[B] = xb[:, k]
            x[N] = patterns[k]
            best = VertexSolution(x=x, objective=float(objs[k]), basis=basis)
    if best is None:
        raise Infeasible("no basic solution satisfies the bounds")
    return best


def _check_bounded(A: np.ndarray, c: np.ndarray, lo: np.ndarray,
                   hi: np.ndarray, tol: float = 1e-9) -> None:
    """Reject instances whose recession cone contains an improving ray.

    The cone's directions v satisfy Av = 0 with v_i >= 0 where only the lower
    bound is finite, v_i <= 0 where only the upper is, v_i = 0 where both
    are.  Minimizing c'v over that cone intersected with the unit box is a
    fully bounded LP, so it can reuse the enumerator.
    """
    ray_lo = np.where(np.isfinite(lo), 0.0, -1.0)
    ray_hi = np.where(np.isfinite(hi), 0.0, 1.0)
    ray = vertex_lp_solve(A, np.zeros(A.shape[0]), c,
                          np.stack([ray_lo, ray_hi], axis=1))
    if ray.objective < -tol:
        raise Unbounded(
            f"improving recession direction with c'v = {ray.objective:.3e}")


# ---------------------------------------------------------------------------
# inverse-Hessian drift measurement
# ---------------------------------------------------------------------------

class DriftReport(NamedTuple):
    """Maxima over a trace of the three scaling-drift quantities."""

    c1: float                 # max_k sqrt(sum_i drift_{ik}^2)
    c2: float                 # max_k (sum_i drift_{ik}^4)^{1/2}
    per_step_max: np.ndarray  # max_i drift_{ik} for each step k


def drift_diagnostics(trace: DenseTrace, barriers: BlockBarriers) -> DriftReport:
    """Relative Frobenius drift of the inverse-Hessian blocks along a trace.

    For consecutive iterates x -> x', each block contributes

        drift_i = || w_i^{-1/2} (w_i' - w_i) w_i^{-1/2} ||_F,

    where w_i is the inverse-Hessian block at x.  The report carries the
    trace maxima of the l2 and l4 aggregates over blocks (the quantities the
    update schedule is sized against) and the per-step max block drift,
    which stays below 1/4 on any healthy run.
    """
    if len(trace.rows) < 2:
        return DriftReport(0.0, 0.0, np.zeros(0))
    st = barriers.structure
    c1_steps, c2_steps, max_steps = [], [], []
    for prev, nxt in zip(trace.rows, trace.rows[1:]):
        w_old = barriers.hessian_inverse(prev.x)
        w_new = barriers.hessian_inverse(nxt.x)
        drifts = np.empty(st.m)
        for i in range(st.m):
            wo, wn = w_old.block(i), w_new.block(i)
            if wo.shape == (1, 1):
                drifts[i] = abs(wn[0, 0] - wo[0, 0]) / wo[0, 0]
            else:
                vals, vecs = np.linalg.eigh(wo)
                isq = (vecs / np.sqrt(vals)) @ vecs.T
                drifts[i] = np.linalg.norm(isq @ (wn - wo) @ isq)
        c1_steps.append(math.sqrt(float(np.sum(drifts ** 2))))
        c2_steps.append(math.sqrt(float(np.sum(drifts ** 4))))
        max_steps.append(float(drifts.max()))
    return DriftReport(max(c1_steps), max(c2_steps), np.array(max_steps))
