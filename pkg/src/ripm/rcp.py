"""Robust central-path stepping.

The driver follows the family of barrier subproblems indexed by t > 0: at the
exact path point the per-block residual mu_i = s_i/t + grad phi_i(x_i)
vanishes.  Working only from the maintained approximations (x_bar, s_bar),
each iteration measures the block centrality errors

    gamma_i = || mu_i ||  in the local dual norm at x_bar_i,

forms a soft-max weighted correction h that concentrates on the worst blocks,
hands h to the maintenance structure, and shrinks t by (1 - kappa/sqrt(nu)).
The potential Phi = sum_i exp(lambda gamma_i) certifies that no block's error
escapes; all exponentials here are computed in shifted (log-sum-exp) form so
the large lambda of the faithful parameter regime cannot overflow.

Two parameter regimes are provided: ``PathParams.paper`` uses the original
constants (lambda = 2^16 ln m and friends), which are meant for asymptotic
analysis and take ~10^8 iterations on desk instances; ``PathParams.practical``
keeps every structural safeguard (lambda * alpha <= 1/100, 96 sqrt(alpha) < 1)
at constants that converge in reasonable time.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .blocklin import BlockDiagMatrix, BlockStructure
from .barriers import BlockBarriers
from .cpm import CentralPathMaintenance
from .errors import IterationLimit, NumericalBreakdown, OutOfDomain, RipmError
from . import problem as problem_mod
from .problem import ModifiedProblem, Solution, StandardProblem, gap_certificate, recover_dual

__all__ = [
    "PathParams",
    "PathState",
    "IterationRecord",
    "PotentialValue",
    "mu",
    "gamma",
    "centrality_errors",
    "soft_coeff",
    "scaled_direction",
    "step_direction",
    "potential",
    "softmax_potential",
    "solve",
]

log = logging.getLogger(__name__)

#: Activation multiplier: blocks with gamma below 96 sqrt(alpha) are left alone.
ACTIVATION = 96.0

#: Terminal centering targets.  The duality-gap certificate needs every block
#: error inside the unit dual ball at the final point.  Practical-regime runs
#: finish the t schedule hovering just above the activation threshold
#: (sqrt(0.99) when alpha sits at its cap), which can overshoot 1, so the
#: driver spends up to POLISH_BUDGET extra fixed-t correction steps pushing
#: max gamma below CERT_GAMMA_GOAL.  Paper-regime thresholds are tiny and the
#: goal already holds at termination, costing zero extra iterations there.
CERT_GAMMA_GOAL = 0.999
POLISH_BUDGET = 20_000


@dataclass(frozen=True)
class PathParams:
    """Constants of the path-following loop.

    ``lam`` sharpens the soft-max over block errors, ``alpha`` is the step
    size in the local Hessian norm, ``kappa`` the per-iteration shrink rate
    of t, ``nu`` the total barrier parameter, and ``delta`` the target
    accuracy.  Invariants enforced: lam * alpha <= 1/100 and
    96 sqrt(alpha) < 1 (both are load-bearing for the stability of the
    soft-step), kappa < sqrt(nu), delta <= 1/lam.
    """

    lam: float
    alpha: float
    kappa: float
    nu: float
    delta: float
    mode: str = "practical"
    m: int = 0

    def __post_init__(self):
        for nm in ("lam", "alpha", "kappa", "nu", "delta"):
            v = getattr(self, nm)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{nm}={v} must be positive and finite")
        if self.lam * self.alpha > 0.01 + 1e-12:
            raise ValueError(
                f"lam*alpha = {self.lam * self.alpha:.3e} exceeds 1/100")
        if ACTIVATION * math.sqrt(self.alpha) >= 1.0:
            raise ValueError(
                f"96*sqrt(alpha) = {ACTIVATION * math.sqrt(self.alpha):.3f} "
                f"must be < 1")
        if self.kappa >= math.sqrt(self.nu):
            raise ValueError("kappa must be below sqrt(nu)")
        if self.nu < 1.0:
            raise ValueError(f"nu={self.nu} must be >= 1")
        if self.delta > 1.0 / self.lam + 1e-12:
            raise ValueError(f"delta={self.delta} exceeds 1/lam={1.0 / self.lam:.3e}")
        if self.mode not in ("paper", "practical"):
            raise ValueError(f"unknown mode '{self.mode}'")

    # -- constructors ------------------------------------------------------

    @classmethod
    def paper(cls, m: int, nu: float, delta: float = 1e-3) -> "PathParams":
        """Faithful constants: lambda = 2^16 ln m, alpha = 2^-20 lambda^-2,
        kappa = 2^-10 alpha.  For invariant checks, not production runs."""
        lam = 2.0 ** 16 * math.log(max(m, 3))
        alpha = 2.0 ** -20 / lam ** 2
        return cls(lam=lam, alpha=alpha, kappa=2.0 ** -10 * alpha, nu=float(nu),
                   delta=min(float(delta), 1.0 / lam), mode="paper", m=int(m))

    @classmethod
    def practical(cls, m: int, nu: float, delta: float = 1e-3,
                  c_lambda: float = 2.0, c_alpha: Optional[float] = None,
                  c_kappa: float = 0.75) -> "PathParams":
        """Desk-scale constants with the same invariants.

        alpha saturates at the largest value the invariants allow unless
        c_alpha is given; kappa = c_kappa * alpha keeps the block errors
        hovering just above the activation threshold, where the soft step
        is provably contractive.
        """
        lam = c_lambda * math.log(max(m, 3))
        cands = [0.01 / lam, 0.99 / ACTIVATION ** 2]
        if c_alpha is not None:
            cands.append(c_alpha / lam ** 2)
        alpha = min(cands)
        return cls(lam=lam, alpha=alpha, kappa=c_kappa * alpha, nu=float(nu),
                   delta=min(float(delta), 1.0 / lam), mode="practical", m=int(m))

    # -- derived quantities ------------------------------------------------

    @property
    def threshold(self) -> float:
        """Activation level 96 sqrt(alpha) for the block errors."""
        return ACTIVATION * math.sqrt(self.alpha)

    @property
    def t_end(self) -> float:
        """Termination level: loop runs while t > delta^2 / (4 nu)."""
        return self.delta ** 2 / (4.0 * self.nu)

    @property
    def shrink(self) -> float:
        """Per-iteration multiplier on t."""
        return 1.0 - self.kappa / math.sqrt(self.nu)

    def predicted_iterations(self) -> int:
        """Exact length of the deterministic t schedule."""
        return math.ceil(math.log(self.t_end) / math.log(self.shrink))

    def potential_cap(self) -> float:
        """The invariant level 80 m / alpha that Phi must stay below."""
        return 80.0 * max(self.m, 1) / self.alpha


# ---------------------------------------------------------------------------
# step math
# ---------------------------------------------------------------------------

def mu(i: int, x_bar: np.ndarray, s_bar: np.ndarray, t: float,
       barriers: BlockBarriers) -> np.ndarray:
    """Block centrality residual s_i/t + grad phi_i(x_i)."""
    sl = barriers.structure.slice(i)
    return s_bar[sl] / float(t) + barriers.barriers[i].grad(x_bar[sl])


def gamma(i: int, mu_i: np.ndarray, x_bar: np.ndarray,
          barriers: BlockBarriers) -> float:
    """Local dual norm of a block residual: ||mu_i||_{hess phi_i(x_i)^{-1}}."""
    sl = barriers.structure.slice(i)
    H = barriers.barriers[i].hess(x_bar[sl])
    mu_i = np.asarray(mu_i, dtype=float)
    return math.sqrt(max(float(mu_i @ np.linalg.solve(H, mu_i)), 0.0))


def centrality_errors(x_bar: np.ndarray, s_bar: np.ndarray, t: float,
                      barriers: BlockBarriers,
                      w_bar: Optional[BlockDiagMatrix] = None,
                      ) -> tuple[np.ndarray, np.ndarray]:
    """All residuals and their dual norms at once: (mu vector, gamma vector).

    Pass ``w_bar`` = inverse Hessian if already computed; otherwise it is
    built here and discarded.
    """
    mu_vec = s_bar / float(t) + barriers.gradient(x_bar)
    if w_bar is None:
        w_bar = barriers.hessian_inverse(x_bar)
    return mu_vec, w_bar.quadform_norms(mu_vec)


def soft_coeff(gammas: np.ndarray, lam: float, alpha: float) -> np.ndarray:
    """Soft-max step weights over the blocks.

    c_i = exp(lam g_i)/g_i / sqrt(sum_j exp(2 lam g_j)) where g_i is at or
    above the activation level 96 sqrt(alpha), zero below it.  Computed with
    the largest exponent factored out of numerator and denominator, so any
    lam is safe.  By construction c_i <= 1/(96 sqrt(alpha)).
    """
    g = np.asarray(gammas, dtype=float)
    out = np.zeros_like(g)
    active = g >= ACTIVATION * math.sqrt(alpha)
    if not active.any():
        return out
    w = lam * g
    shift = float(w.max())
    denom = math.sqrt(float(np.exp(2.0 * (w - shift)).sum()))
    out[active] = np.exp(w[active] - shift) / (g[active] * denom)
    return out


def scaled_direction(mu_vec: np.ndarray, gammas: np.ndarray,
                     params: PathParams, structure: BlockStructure) -> np.ndarray:
    """The correction h with h_i = -alpha c_i mu_i blockwise."""
    coeff = soft_coeff(gammas, params.lam, params.alpha)
    h = np.zeros(structure.n)
    for i in np.nonzero(coeff)[0]:
        sl = structure.slice(i)
        h[sl] = -params.alpha * coeff[i] * mu_vec[sl]
    return h


def step_direction(x_bar: np.ndarray, s_bar: np.ndarray, t: float,
                   params: PathParams, barriers: BlockBarriers,
                   ) -> tuple[np.ndarray, BlockDiagMatrix]:
    """One step's inputs for the maintenance structure: (h, inverse Hessian)."""
    w_bar = barriers.hessian_inverse(x_bar)
    mu_vec, gammas = centrality_errors(x_bar, s_bar, t, barriers, w_bar)
    return scaled_direction(mu_vec, gammas, params, barriers.structure), w_bar


class PotentialValue(NamedTuple):
    """Soft-max potential with its log, for overflow-free comparisons."""

    value: float
    log: float


def softmax_potential(gammas: np.ndarray, lam: float) -> PotentialValue:
    """Phi = sum_i exp(lam gamma_i), evaluated in shifted form."""
    w = lam * np.asarray(gammas, dtype=float)
    shift = float(w.max())
    log_phi = shift + math.log(float(np.exp(w - shift).sum()))
    return PotentialValue(math.exp(log_phi) if log_phi < 700.0 else math.inf,
                          log_phi)


def potential(x_bar: np.ndarray, s_bar: np.ndarray, t: float,
              params: PathParams, barriers: BlockBarriers) -> PotentialValue:
    """Phi at the maintained point; see softmax_potential."""
    _, gammas = centrality_errors(x_bar, s_bar, t, barriers)
    return softmax_potential(gammas, params.lam)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

@dataclass
class IterationRecord:
    """One row of the per-iteration log."""

    iteration: int
    t: float
    log_phi: float
    max_gamma: float
    h_norm: float
    branch: str
    r: int
    rebuilds: int
    wall_ms: float


@dataclass
class PathState:
    """Mutable loop state, exposed for inspection and callbacks."""

    t: float
    maintenance: CentralPathMaintenance
    iteration: int = 0
    potential_breaches: int = 0


def solve(problem: StandardProblem, params: Optional[PathParams] = None, *,
          delta: float = 1e-2, mode: str = "practical",
          eps_mp: Optional[float] = None, batch_exponent: float = 0.31,
          sketch_width: Optional[int] = None, bank_count: Optional[int] = None,
          identity_sketch: bool = False, seed: int = 0,
          max_iters: Optional[int] = None,
          callback: Optional[Callable[[IterationRecord], None]] = None,
          keep_log: bool = True, engine: str = "auto") -> Solution:
    """Solve a standard-form problem to certified accuracy delta.

    Embeds the problem (module ``problem``), runs the robust path loop from
    t = 1 down to delta^2/(4 nu), and extracts the original-variable solution
    with its certified bounds.  ``params`` overrides the constants; when
    omitted they are built for the embedded dimensions in the given mode.

    ``engine`` selects the loop implementation: "reference" is the numpy
    loop in this module, "jit" the compiled scalar-block loop (exact
    queries; raises ValueError when the problem needs the reference loop),
    and "auto" picks the compiled one whenever it applies.

    Raises IterationLimit when ``max_iters`` is hit and NumericalBreakdown
    (with a diagnostics snapshot) if an iterate degenerates.
    """
    modified = problem_mod.build_modified(
        problem,
        delta if params is None else params.delta)
    embedded = modified.problem
    barriers = embedded.block_barriers
    if params is None:
        if mode == "paper":
            params = PathParams.paper(embedded.m, embedded.nu, delta)
        else:
            params = PathParams.practical(embedded.m, embedded.nu, delta)
        if params.delta != delta:
            # delta was clamped to 1/lam; rebuild the embedding to match
            modified = problem_mod.build_modified(problem, params.delta)
            embedded = modified.problem
            barriers = embedded.block_barriers
    elif params.nu != embedded.nu or params.m not in (0, embedded.m):
        raise ValueError(
            f"params sized for (m={params.m}, nu={params.nu}) but the "
            f"embedded problem has (m={embedded.m}, nu={embedded.nu})")
    if modified.centrality > params.delta * (1.0 + 1e-6):
        log.warning("initial centrality %.3e exceeds delta=%.3e",
                    modified.centrality, params.delta)

    if engine not in ("auto", "jit", "reference"):
        raise ValueError(f"unknown engine {engine!r}")
    budget = params.predicted_iterations() + 8 if max_iters is None else int(max_iters)
    if engine != "reference":
        from . import _engine
        reason = _engine.unsupported_reason(barriers, identity_sketch,
                                            sketch_width)
        if reason is None:
            run = _engine.run(
                embedded.A, modified.x0, modified.s0,
                _engine.scalar_bounds(barriers), params, eps_mp=eps_mp,
                batch_exponent=batch_exponent, bank_count=bank_count,
                budget=budget, hard_budget=max_iters is not None,
                keep_log=keep_log, callback=callback)
            return _finish(modified, problem, params, run.x, run.s, run.t,
                           run.iterations, run.rebuilds, run.records)
        if engine == "jit":
            raise ValueError(f"engine='jit' cannot run this problem: {reason}")

    w0 = barriers.hessian_inverse(modified.x0)
    maint = CentralPathMaintenance(
        embedded.A, modified.x0, modified.s0, w0, eps_mp=eps_mp,
        a=batch_exponent, b=sketch_width, seed=seed,
        bank_count=bank_count, identity_sketch=identity_sketch)
    state = PathState(t=1.0, maintenance=maint)
    log_cap = math.log(params.potential_cap())
    records: list[IterationRecord] = []

    while state.t > params.t_end:
        if state.iteration >= budget:
            raise IterationLimit(
                f"iteration budget {budget} exhausted at t={state.t:.3e} "
                f"(target {params.t_end:.3e})")
        started = time.perf_counter()
        x_bar, s_bar = maint.query()
        try:
            w_bar = barriers.hessian_inverse(x_bar)
            mu_vec, gammas = centrality_errors(x_bar, s_bar, state.t,
                                               barriers, w_bar)
        except OutOfDomain as exc:
            raise NumericalBreakdown(
                f"maintained point left the domain at iteration "
                f"{state.iteration}: {exc}",
                snapshot=_snapshot(state, x_bar)) from exc
        if not np.isfinite(gammas).all():
            raise NumericalBreakdown(
                f"non-finite centrality errors at iteration {state.iteration}",
                snapshot=_snapshot(state, x_bar))
        h = scaled_direction(mu_vec, gammas, params, barriers.structure)
        info = maint.update(w_bar)
        maint.multiply_move(h, state.t)
        phi = softmax_potential(gammas, params.lam)
        if phi.log > log_cap:
            state.potential_breaches += 1
            if state.potential_breaches == 1:
                log.warning("potential exceeded its invariant level at "
                            "iteration %d: log Phi = %.3f > %.3f",
                            state.iteration, phi.log, log_cap)
        state.t *= params.shrink
        state.iteration += 1
        if keep_log or callback is not None:
            rec = IterationRecord(
                iteration=state.iteration, t=state.t, log_phi=phi.log,
                max_gamma=float(gammas.max()), h_norm=float(np.linalg.norm(h)),
                branch=info.branch, r=info.r, rebuilds=maint.total_rebuilds,
                wall_ms=1e3 * (time.perf_counter() - started))
            if keep_log:
                records.append(rec)
            if callback is not None:
                callback(rec)

    polish_cap = POLISH_BUDGET if max_iters is None else min(
        POLISH_BUDGET, max(0, budget - state.iteration))
    for _ in range(polish_cap):
        started = time.perf_counter()
        x_bar, s_bar = maint.query()
        try:
            w_bar = barriers.hessian_inverse(x_bar)
            mu_vec, gammas = centrality_errors(x_bar, s_bar, state.t,
                                               barriers, w_bar)
        except OutOfDomain as exc:
            raise NumericalBreakdown(
                f"maintained point left the domain at iteration "
                f"{state.iteration}: {exc}",
                snapshot=_snapshot(state, x_bar)) from exc
        if float(gammas.max()) <= CERT_GAMMA_GOAL:
            break
        h = scaled_direction(mu_vec, gammas, params, barriers.structure)
        info = maint.update(w_bar)
        maint.multiply_move(h, state.t)
        state.iteration += 1
        if keep_log or callback is not None:
            phi = softmax_potential(gammas, params.lam)
            rec = IterationRecord(
                iteration=state.iteration, t=state.t, log_phi=phi.log,
                max_gamma=float(gammas.max()), h_norm=float(np.linalg.norm(h)),
                branch=info.branch, r=info.r, rebuilds=maint.total_rebuilds,
                wall_ms=1e3 * (time.perf_counter() - started))
            if keep_log:
                records.append(rec)
            if callback is not None:
                callback(rec)
    else:
        if polish_cap:
            log.warning("terminal centering did not reach max gamma <= %.3f "
                        "within %d extra iterations", CERT_GAMMA_GOAL,
                        polish_cap)

    x_fin, s_fin = maint.exact_iterates()
    return _finish(modified, problem, params, x_fin, s_fin, state.t,
                   state.iteration, maint.total_rebuilds, records)


def _finish(modified, problem: StandardProblem, params: PathParams,
            x_fin: np.ndarray, s_fin: np.ndarray, t_fin: float,
            iterations: int, rebuilds: int,
            records: list[IterationRecord]) -> Solution:
    """Extract and certify the final iterates (common to both engines)."""
    embedded = modified.problem
    sol = problem_mod.extract_solution(modified, x_fin, t_fin, problem,
                                       params.delta)
    cert_ok: Optional[bool]
    try:
        y_fin = recover_dual(embedded.A, embedded.c, s_fin)
        bound = gap_certificate(embedded, x_fin, s_fin, y_fin, t_fin)
        cert_ok = True
    except RipmError as exc:
        log.info("gap certificate did not verify: %s", exc)
        bound = 4.0 * t_fin * embedded.nu
        cert_ok = False
    return replace(sol, gap_bound=bound, certificate_valid=cert_ok,
                   iterations=iterations, rebuilds=rebuilds,
                   records=records,
                   status="converged" if cert_ok else "converged-uncertified")


def _snapshot(state: PathState, x_bar: np.ndarray) -> dict:
    return {
        "iteration": state.iteration,
        "t": state.t,
        "x_bar_min": float(np.min(x_bar)),
        "x_bar_max": float(np.max(x_bar)),
        "rebuilds": state.maintenance.total_rebuilds,
    }
