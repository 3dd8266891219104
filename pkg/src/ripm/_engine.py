"""Compiled fast path for problems whose blocks are all one-dimensional.

The reference driver in ``rcp`` spends a few hundred microseconds of numpy
dispatch per iteration, which hurts when practical schedules run for
10^5 - 10^6 iterations.  This module reruns the *same* loop -- identical t
schedule, scaling-update policy, rebuild cadence, and log fields -- as a
numba kernel specialized to scalar blocks (every LP: box and positive
domains).  Queries are exact here, matching the reference's identity-sketch
configuration; runs with a real sign sketch stay on the reference path.

The kernel executes in chunks so callers can stream per-iteration records
and enforce budgets without leaving compiled code for every step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .barriers import BlockBarriers
from .config import bank_count_default, eps_mp_default
from .errors import IterationLimit, NumericalBreakdown

log = logging.getLogger(__name__)

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - the mirror always ships numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_CHUNK = 1 << 16
_SANDWICH_SLACK = 1e-12  # kept in sync with the maintenance structure

#: kernel exit codes
_OK = 0
_LEFT_DOMAIN = 1
_NOT_FINITE = 2
_GOAL_REACHED = 3


def scalar_bounds(barriers: BlockBarriers) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Per-coordinate (lo, hi) arrays, or None when a block is unsupported."""
    lo, hi = [], []
    for bar in barriers.barriers:
        if bar.dim != 1:
            return None
        if bar.kind == "log_positive":
            lo.append(0.0)
            hi.append(math.inf)
        elif bar.kind == "log_box":
            lo.append(bar.params["lo"])
            hi.append(bar.params["hi"])
        else:
            return None
    return np.array(lo), np.array(hi)


def unsupported_reason(barriers: BlockBarriers, identity_sketch: bool,
                       sketch_width: Optional[int]) -> Optional[str]:
    """Why the compiled path cannot run this configuration (None if it can)."""
    if not HAVE_NUMBA:
        return "numba is not importable"
    if scalar_bounds(barriers) is None:
        return "blocks outside {log_box, log_positive} need the reference loop"
    if not identity_sketch and sketch_width is not None:
        return "explicit sketch widths run on the reference loop"
    return None


@njit(cache=True)
def _rebuild(A, v, G):  # pragma: no cover - exercised through _run_chunk
    """G := (A diag(v) A')^{-1}, symmetrized."""
    d, n = A.shape
    S = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(n):
                acc += A[i, k] * v[k] * A[j, k]
            S[i, j] = acc
    Gn = np.linalg.inv(S)
    for i in range(d):
        for j in range(d):
            G[i, j] = 0.5 * (Gn[i, j] + Gn[j, i])


@njit(cache=True)
def _run_chunk(A, At, lo, hi, x, s, v, vt, G, drift,
               t, t_pre, t_cur, takes_left, rebuilds,
               lam, alpha, threshold, eps_mp, batch_cut, slack, shrink,
               t_end, bank_count, log_cap, breaches, steps,
               lt, lphi, lgam, lhn, lbranch, lr, lreb,
               polish, gamma_goal,
               ):  # pragma: no cover - jit body; covered via the driver
    d, n = A.shape
    done = 0
    status = _OK
    mu = np.empty(n)
    gam = np.empty(n)
    h = np.empty(n)
    w = np.empty(n)
    grad = np.empty(n)

    while done < steps and t > t_end:
        # ---- local geometry ------------------------------------------------
        bad = False
        for i in range(n):
            a = x[i] - lo[i]
            b = hi[i] - x[i]
            if a <= 0.0 or b <= 0.0:
                bad = True
                break
            ia = 1.0 / a
            ib = 1.0 / b
            grad[i] = -ia + ib
            hs = ia * ia + ib * ib
            w[i] = 1.0 / hs
        if bad:
            status = _LEFT_DOMAIN
            break

        # ---- residuals and the soft-max direction --------------------------
        shift = -math.inf
        for i in range(n):
            mu[i] = s[i] / t + grad[i]
            gam[i] = abs(mu[i]) * math.sqrt(w[i])
            wt = lam * gam[i]
            if wt > shift:
                shift = wt
        if not math.isfinite(shift):
            status = _NOT_FINITE
            break
        se = 0.0
        s2 = 0.0
        gmax = 0.0
        for i in range(n):
            e = math.exp(lam * gam[i] - shift)
            se += e
            s2 += e * e
            if gam[i] > gmax:
                gmax = gam[i]
        log_phi = shift + math.log(se)
        if polish == 1 and gmax <= gamma_goal:
            status = _GOAL_REACHED
            break
        denom = math.sqrt(s2)
        hnorm2 = 0.0
        for i in range(n):
            if gam[i] >= threshold:
                c = math.exp(lam * gam[i] - shift) / (gam[i] * denom)
                h[i] = -alpha * c * mu[i]
                hnorm2 += h[i] * h[i]
            else:
                h[i] = 0.0

        # ---- scaling update (same policy as the maintenance structure) -----
        r = 0
        for i in range(n):
            if abs(w[i] / v[i] - 1.0) >= eps_mp:
                r += 1
        r_logged = r
        if r < batch_cut:
            branch = np.uint8(0)
            for i in range(n):
                ratio = w[i] / v[i]
                if 1.0 - eps_mp - _SANDWICH_SLACK <= ratio <= 1.0 + eps_mp + _SANDWICH_SLACK:
                    vt[i] = v[i]
                    drift[i] = False
                else:
                    vt[i] = w[i]
                    drift[i] = True
        else:
            branch = np.uint8(1)
            norms = np.empty(n)
            for i in range(n):
                norms[i] = abs(w[i] / v[i] - 1.0)
            order = np.argsort(-norms)
            if n > 1:
                while r >= 1 and 1.5 * r < n:
                    nxt = int(min(math.ceil(1.5 * r), n))
                    if norms[order[nxt - 1]] < slack * norms[order[r - 1]]:
                        break
                    r = nxt
            S = np.sort(order[:r])
            U = A[:, S]
            delta = np.empty(r)
            for j in range(r):
                delta[j] = w[S[j]] - v[S[j]]
            GU = G @ U
            cap = U.T @ GU
            for a_ in range(r):
                for b_ in range(r):
                    cap[a_, b_] *= delta[a_]
                cap[a_, a_] += 1.0
            sv = np.linalg.svd(cap)[1]
            if sv[-1] <= max(1.0, sv[0]) / 1e14:
                # not absorbable as a low-rank correction: rebuild exactly
                # (a rebuild starts a fresh sketch bank, hence takes_left)
                for i in range(n):
                    v[i] = w[i]
                    vt[i] = w[i]
                    drift[i] = False
                _rebuild(A, v, G)
                rebuilds += 1
                takes_left = bank_count
                t_pre = t_cur
            else:
                mid = np.linalg.solve(cap, (GU * delta).T)  # r x d
                Gn = G - GU @ mid
                for i in range(d):
                    for j in range(d):
                        G[i, j] = 0.5 * (Gn[i, j] + Gn[j, i])
                for j in range(r):
                    v[S[j]] = w[S[j]]
                for i in range(n):
                    ratio = w[i] / v[i]
                    if 1.0 - eps_mp - _SANDWICH_SLACK <= ratio <= 1.0 + eps_mp + _SANDWICH_SLACK:
                        vt[i] = v[i]
                        drift[i] = False
                    else:
                        vt[i] = w[i]
                        drift[i] = True
                if t_cur >= 0.0:
                    t_pre = t_cur

        # ---- projected step through the lazy scaling -----------------------
        t_cur = t
        if t_pre < 0.0:
            t_pre = t
        z = vt * h
        az = A @ z
        gaz = G @ az
        nd = 0
        for i in range(n):
            if drift[i]:
                nd += 1
        if nd > 0:
            Sd = np.empty(nd, dtype=np.int64)
            k = 0
            for i in range(n):
                if drift[i]:
                    Sd[k] = i
                    k += 1
            Ud = A[:, Sd]
            dd = np.empty(nd)
            for j in range(nd):
                dd[j] = vt[Sd[j]] - v[Sd[j]]
            rhs = Ud.T @ gaz
            GUd = G @ Ud
            capd = Ud.T @ GUd
            for a_ in range(nd):
                for b_ in range(nd):
                    capd[a_, b_] *= dd[a_]
                capd[a_, a_] += 1.0
            sv = np.linalg.svd(capd)[1]
            if sv[-1] <= max(1.0, sv[0]) / 1e14:
                # capacitance went singular: fold into a fresh exact state
                for i in range(n):
                    v[i] = w[i]
                    vt[i] = w[i]
                    drift[i] = False
                _rebuild(A, v, G)
                rebuilds += 1
                t_pre = t_cur
                takes_left = bank_count
                az = A @ z
                ustar = G @ az
            else:
                dm = np.linalg.solve(capd, dd * rhs)
                ustar = G @ (az - Ud @ dm)
        else:
            ustar = gaz
        back = At @ ustar
        for i in range(n):
            x[i] += z[i] - vt[i] * back[i]
            s[i] += t * back[i]

        takes_left -= 1
        if takes_left <= 0 or t <= t_pre / 2.0:
            for i in range(n):
                v[i] = w[i]
                vt[i] = w[i]
                drift[i] = False
            _rebuild(A, v, G)
            rebuilds += 1
            t_pre = t_cur
            takes_left = bank_count

        if log_phi > log_cap:
            breaches += 1

        t *= shrink
        lt[done] = t
        lphi[done] = log_phi
        lgam[done] = gmax
        lhn[done] = math.sqrt(hnorm2)
        lbranch[done] = branch
        lr[done] = r_logged
        lreb[done] = rebuilds
        done += 1

    return done, t, t_pre, t_cur, takes_left, rebuilds, breaches, status


@dataclass
class RunResult:
    """Final state of a compiled run, before extraction."""

    x: np.ndarray
    s: np.ndarray
    t: float
    iterations: int
    rebuilds: int
    potential_breaches: int
    records: list


def run(A: np.ndarray, x0: np.ndarray, s0: np.ndarray,
        bounds: tuple[np.ndarray, np.ndarray], params, *,
        eps_mp: Optional[float] = None, batch_exponent: float = 0.31,
        bank_count: Optional[int] = None, budget: int,
        hard_budget: bool = False, keep_log: bool = False,
        callback: Optional[Callable] = None, chunk: int = _CHUNK) -> RunResult:
    """Drive the kernel to t_end, a budget overrun, or a breakdown, then
    spend up to the terminal-centering allowance at fixed t (see rcp).

    Mirrors the reference loop's observable behavior: the same iteration
    budget semantics (``hard_budget`` makes the centering phase count
    against ``budget`` too, matching an explicit max_iters), the same
    record fields (wall_ms is 0 here: the kernel does not read clocks),
    and the same breakdown snapshots.
    """
    # deferred: rcp imports this module
    from .rcp import CERT_GAMMA_GOAL, POLISH_BUDGET, IterationRecord

    d, n = A.shape
    lo, hi = bounds
    eps = eps_mp_default(n) if eps_mp is None else float(eps_mp)
    bank = bank_count_default(n) if bank_count is None else int(bank_count)
    x = np.array(x0, dtype=float)
    s = np.array(s0, dtype=float)
    v = np.empty(n)
    for i in range(n):
        a, b = x[i] - lo[i], hi[i] - x[i]
        v[i] = 1.0 / (1.0 / a ** 2 + 1.0 / b ** 2)
    vt = v.copy()
    drift = np.zeros(n, dtype=np.bool_)
    G = np.empty((d, d))
    _rebuild(np.ascontiguousarray(A, dtype=float), v, G)

    t, t_pre, t_cur = 1.0, -1.0, -1.0
    takes_left, rebuilds, breaches = bank, 0, 0
    iterations = 0
    records: list = []
    want_rows = keep_log or callback is not None
    size = chunk if want_rows else min(chunk, max(budget, 1))
    lt, lphi, lgam, lhn = (np.empty(size) for _ in range(4))
    lbranch = np.empty(size, dtype=np.uint8)
    lr, lreb = np.empty(size, dtype=np.int64), np.empty(size, dtype=np.int64)
    log_cap = math.log(params.potential_cap())
    first_breach_logged = False

    At = np.ascontiguousarray(A.T, dtype=float)
    A = np.ascontiguousarray(A, dtype=float)
    batch_cut = float(n) ** batch_exponent
    slack = 1.0 - 1.0 / math.log(n) if n > 1 else 0.0

    def _chunk_step(steps: int, shrink: float, t_end: float, polish: int):
        nonlocal t, t_pre, t_cur, takes_left, rebuilds, breaches
        nonlocal iterations, first_breach_logged
        done, t, t_pre, t_cur, takes_left, rebuilds, breaches, status = _run_chunk(
            A, At, lo, hi, x, s, v, vt, G, drift,
            t, t_pre, t_cur, takes_left, rebuilds,
            params.lam, params.alpha, params.threshold, eps,
            batch_cut, slack, shrink, t_end, bank, log_cap, breaches, steps,
            lt, lphi, lgam, lhn, lbranch, lr, lreb, polish, CERT_GAMMA_GOAL)
        if want_rows:
            names = ("partial", "full")
            for k in range(done):
                rec = IterationRecord(
                    iteration=iterations + k + 1, t=float(lt[k]),
                    log_phi=float(lphi[k]), max_gamma=float(lgam[k]),
                    h_norm=float(lhn[k]), branch=names[lbranch[k]],
                    r=int(lr[k]), rebuilds=int(lreb[k]), wall_ms=0.0)
                if keep_log:
                    records.append(rec)
                if callback is not None:
                    callback(rec)
        iterations += done
        if breaches and not first_breach_logged:
            log.warning("potential exceeded its invariant level within the "
                        "first %d iterations", iterations)
            first_breach_logged = True
        if status in (_LEFT_DOMAIN, _NOT_FINITE):
            reason = ("maintained point left the domain"
                      if status == _LEFT_DOMAIN else
                      "non-finite centrality errors")
            raise NumericalBreakdown(
                f"{reason} at iteration {iterations}",
                snapshot={"iteration": iterations, "t": float(t),
                          "x_bar_min": float(np.min(x)),
                          "x_bar_max": float(np.max(x)),
                          "rebuilds": int(rebuilds)})
        return status

    while t > params.t_end:
        if iterations >= budget:
            raise IterationLimit(
                f"iteration budget {budget} exhausted at t={t:.3e} "
                f"(target {params.t_end:.3e})")
        _chunk_step(min(size, budget - iterations), params.shrink,
                    params.t_end, 0)

    polish_cap = POLISH_BUDGET if not hard_budget else min(
        POLISH_BUDGET, max(0, budget - iterations))
    spent = 0
    reached = polish_cap == 0
    while spent < polish_cap:
        before = iterations
        status = _chunk_step(min(size, polish_cap - spent), 1.0, -1.0, 1)
        spent += iterations - before
        if status == _GOAL_REACHED:
            reached = True
            break
    if not reached and polish_cap:
        log.warning("terminal centering did not reach max gamma <= %.3f "
                    "within %d extra iterations", CERT_GAMMA_GOAL, polish_cap)
    return RunResult(x=x, s=s, t=float(t), iterations=iterations,
                     rebuilds=int(rebuilds), potential_breaches=int(breaches),
                     records=records)
