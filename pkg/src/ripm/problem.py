"""Standard-form problems, the feasibility embedding, and ERM reductions.

The solver consumes problems of the form

    minimize    c' x
    subject to  A x = b,   x_i in K_i for each block i,

with a self-concordant barrier per block.  This module owns that model plus
the plumbing around it:

* ``build_modified`` embeds a problem into one with a known strictly feasible,
  nearly central starting triple, by appending a single artificial coordinate
  tau (barrier -log tau) whose column absorbs the constraint residual of the
  analytic center.  Driving tau toward zero recovers near-feasibility.
* ``extract_solution`` maps the embedded iterate back and attaches the
  certified objective-excess and infeasibility bounds.
* ``gap_certificate`` checks the dual certificate and prices the remaining
  duality gap as 4 t nu.
* ``erm_to_standard`` rewrites piecewise-linear empirical-risk instances
  (absolute, quantile, hinge losses) as standard-form problems with 2-D
  epigraph blocks.
* ``validate`` and the ``random_lp`` / ``l1_regression`` / ``quantile_regression``
  generators support the CLI and the test suite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from .barriers import Barrier, BlockBarriers, custom_barrier, log_box, log_positive
from .blocklin import BlockStructure
from .config import DEFAULTS
from .errors import CertificateInvalid, UnsupportedLoss

__all__ = [
    "StandardProblem",
    "ModifiedProblem",
    "Solution",
    "ErmInstance",
    "build_modified",
    "extract_solution",
    "recover_dual",
    "gap_certificate",
    "erm_to_standard",
    "erm_objective",
    "erm_decision",
    "loss_value",
    "validate",
    "ValidationReport",
    "random_lp",
    "l1_regression",
    "quantile_regression",
]


# ---------------------------------------------------------------------------
# model types
# ---------------------------------------------------------------------------

@dataclass
class StandardProblem:
    """Equality-constrained block-barrier problem: min c'x, Ax = b, x in prod K_i.

    ``R_diam`` bounds the Euclidean norm of every feasible point; ``L_lip``
    defaults to ||c||_2.  Both enter the embedding's cost scaling, so an
    overestimate of R_diam is safe while an underestimate is not.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    barriers: Sequence[Barrier]
    R_diam: float
    L_lip: Optional[float] = None
    name: str = ""
    structure: BlockStructure = field(default=None, repr=False)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        self.barriers = list(self.barriers)
        derived = BlockStructure([bar.dim for bar in self.barriers])
        if self.structure is None:
            self.structure = derived
        elif self.structure.sizes != derived.sizes:
            raise ValueError("structure sizes disagree with barrier dims")
        n, d = self.structure.n, self.b.shape[0]
        if self.A.shape != (d, n):
            raise ValueError(f"A has shape {self.A.shape}, expected ({d}, {n})")
        if self.c.shape != (n,):
            raise ValueError(f"c has shape {self.c.shape}, expected ({n},)")
        self.R_diam = float(self.R_diam)
        if not (self.R_diam > 0 and math.isfinite(self.R_diam)):
            raise ValueError("R_diam must be positive and finite")
        if self.L_lip is None:
            self.L_lip = float(np.linalg.norm(self.c))

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def d(self) -> int:
        return self.b.shape[0]

    @property
    def m(self) -> int:
        return self.structure.m

    @property
    def nu(self) -> float:
        return float(sum(bar.nu for bar in self.barriers))

    @cached_property
    def block_barriers(self) -> BlockBarriers:
        return BlockBarriers(self.barriers)

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ModifiedProblem:
    """Embedding of a StandardProblem with a strictly feasible starting triple.

    ``problem`` is itself a StandardProblem over n+1 variables: the original
    blocks plus the artificial tau block.  The triple (x0, y0, s0) satisfies
    A_bar x0 = b exactly, s0 = c_bar, y0 = 0, and is delta-central at t = 1
    (the measured centrality is stored for inspection).
    """

    problem: StandardProblem
    x0: np.ndarray
    y0: np.ndarray
    s0: np.ndarray
    cost_scale: float
    delta: float
    centrality: float

    @property
    def a_bar(self) -> np.ndarray:
        return self.problem.A

    @property
    def c_bar(self) -> np.ndarray:
        return self.problem.c


@dataclass
class Solution:
    """Solver output for the original problem, with certified error bounds."""

    x: np.ndarray
    objective: float
    gap_bound: float
    primal_infeas: float
    status: str = "converged"
    tau: float = math.nan
    objective_excess_bound: float = math.nan
    infeas_bound: float = math.nan
    t_final: float = math.nan
    iterations: int = 0
    rebuilds: int = 0
    certificate_valid: Optional[bool] = None
    records: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# embedding (initial point construction)
# ---------------------------------------------------------------------------

def build_modified(problem: StandardProblem, delta: float) -> ModifiedProblem:
    """Append the residual-absorbing tau column and build the starting triple.

    With x_ctr the analytic center of the block domains,

        A_bar = [A | b - A x_ctr],   c_bar = [(delta / (L R)) c ; 1],

    the point (x_ctr, tau=1) is exactly feasible, and s0 = c_bar with y0 = 0
    is within delta of centrality at t = 1: the tau block's cost cancels its
    barrier gradient, and the remaining ||(delta/LR) c|| is at most delta
    because the inverse Hessian at the center is bounded by R^2 I.

    Raises MissingAnalyticCenter when some block has no center available.
    """
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta={delta} must lie in (0, 1)")
    bb = problem.block_barriers
    x_ctr = bb.analytic_center()
    resid = problem.b - problem.A @ x_ctr
    a_bar = np.hstack([problem.A, resid[:, None]])
    L = problem.L_lip if problem.L_lip > 0 else 1.0
    scale = delta / (L * problem.R_diam)
    c_bar = np.concatenate([scale * problem.c, [1.0]])
    bars = list(problem.barriers) + [log_positive()]
    embedded = StandardProblem(
        A=a_bar, b=problem.b, c=c_bar, barriers=bars,
        R_diam=math.hypot(problem.R_diam, 2.0),
        name=(problem.name + "+embedded") if problem.name else "embedded",
    )
    x0 = np.concatenate([x_ctr, [1.0]])
    y0 = np.zeros(problem.d)
    s0 = c_bar.copy()
    ebb = embedded.block_barriers
    shifted = s0 + ebb.gradient(x0)
    w0 = ebb.hessian_inverse(x0)
    centrality = float(np.sqrt(np.sum(w0.quadform_norms(shifted) ** 2)))
    return ModifiedProblem(
        problem=embedded, x0=x0, y0=y0, s0=s0,
        cost_scale=scale, delta=delta, centrality=centrality,
    )


def extract_solution(modified: ModifiedProblem, x_final: np.ndarray,
                     t_final: float, problem: StandardProblem,
                     delta: float) -> Solution:
    """Map an embedded iterate back to the original variables with bounds.

    The returned bounds are the certified ones: objective excess at most
    L R delta and l1 infeasibility at most 3 delta (R sum|A_ij| + ||b||_1),
    both valid once the embedded objective is within delta^2 of its optimum.
    """
    x_final = np.asarray(x_final, dtype=float)
    n = problem.n
    if x_final.shape != (n + 1,):
        raise ValueError(f"embedded iterate has shape {x_final.shape}, "
                         f"expected ({n + 1},)")
    x = x_final[:n].copy()
    tau = float(x_final[n])
    infeas = problem.A @ x - problem.b
    L = problem.L_lip if problem.L_lip > 0 else 1.0
    return Solution(
        x=x,
        objective=problem.objective(x),
        gap_bound=4.0 * float(t_final) * modified.problem.nu,
        primal_infeas=float(np.abs(infeas).sum()),
        tau=tau,
        objective_excess_bound=L * problem.R_diam * float(delta),
        infeas_bound=3.0 * float(delta) * (
            problem.R_diam * float(np.abs(problem.A).sum())
            + float(np.abs(problem.b).sum())),
        t_final=float(t_final),
    )


# ---------------------------------------------------------------------------
# duality-gap certificate
# ---------------------------------------------------------------------------

def recover_dual(A: np.ndarray, c: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Least-squares dual multiplier: y minimizing ||A'y - (c - s)||_2.

    The path-following updates keep c - s in the row space of A exactly, so
    the residual is zero up to roundoff whenever s comes from the solver.
    """
    y, *_ = np.linalg.lstsq(np.asarray(A, dtype=float).T,
                            np.asarray(c, dtype=float) - np.asarray(s, dtype=float),
                            rcond=None)
    return y


def gap_certificate(problem: StandardProblem, x: np.ndarray, s: np.ndarray,
                    y: np.ndarray, t: float, tol: float = 1e-8) -> float:
    """Certified objective excess 4 t nu, after checking the preconditions.

    Requires Ax = b, A'y + s = c, and per-block dual norms
    ||s_i/t + grad phi_i(x_i)||*_{x_i} <= 1, all at relative tolerance
    ``tol``.  Raises CertificateInvalid naming the first failed check.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise CertificateInvalid(f"path parameter t={t} is not positive finite")
    primal = problem.A @ x - problem.b
    if np.abs(primal).max(initial=0.0) > tol * (1.0 + np.abs(problem.b).max(initial=0.0)):
        raise CertificateInvalid(
            f"primal residual ||Ax-b||_inf = {np.abs(primal).max():.3e} too large")
    dual = problem.A.T @ y + s - problem.c
    if np.abs(dual).max(initial=0.0) > tol * (1.0 + np.abs(problem.c).max(initial=0.0)):
        raise CertificateInvalid(
            f"dual residual ||A'y+s-c||_inf = {np.abs(dual).max():.3e} too large")
    bb = problem.block_barriers
    if not bb.interior(x):
        raise CertificateInvalid("point is not interior to the block domains")
    shifted = s / t + bb.gradient(x)
    norms = bb.hessian_inverse(x).quadform_norms(shifted)
    worst = int(np.argmax(norms))
    if norms[worst] > 1.0 + tol:
        raise CertificateInvalid(
            f"block {worst} centrality norm {norms[worst]:.6f} exceeds 1")
    return 4.0 * t * problem.nu


# ---------------------------------------------------------------------------
# piecewise-linear ERM reduction
# ---------------------------------------------------------------------------

#: loss kind -> list of (slope, intercept) pieces; the loss is their max.
_LOSS_PIECES: dict[str, Callable[[tuple], list[tuple[float, float]]]] = {
    "abs": lambda spec: [(1.0, 0.0), (-1.0, 0.0)],
    "quantile": lambda spec: [(spec[1], 0.0), (spec[1] - 1.0, 0.0)],
    "hinge": lambda spec: [(0.0, 0.0), (-1.0, 1.0)],
}

LossSpec = Union[str, tuple]


def _normalize_loss(spec: LossSpec) -> tuple:
    if isinstance(spec, str):
        spec = (spec,)
    spec = tuple(spec)
    kind = spec[0]
    if kind not in _LOSS_PIECES:
        raise UnsupportedLoss(f"unknown loss kind '{kind}'; "
                              f"supported: {sorted(_LOSS_PIECES)}")
    if kind == "quantile":
        if len(spec) != 2:
            raise UnsupportedLoss("quantile loss needs a level: ('quantile', theta)")
        theta = float(spec[1])
        if not (0.0 < theta < 1.0):
            raise UnsupportedLoss(f"quantile level {theta} must lie in (0, 1)")
        return ("quantile", theta)
    if len(spec) != 1:
        raise UnsupportedLoss(f"loss '{kind}' takes no parameters")
    return (kind,)


def loss_pieces(spec: LossSpec) -> list[tuple[float, float]]:
    """The (slope, intercept) pieces of a loss; f(y) = max_j (p_j y + q_j)."""
    spec = _normalize_loss(spec)
    return _LOSS_PIECES[spec[0]](spec)


def loss_value(spec: LossSpec, y: float) -> float:
    return max(p * float(y) + q for p, q in loss_pieces(spec))


@dataclass
class ErmInstance:
    """Sum of piecewise-linear losses of affine forms, over a box.

        minimize  sum_i f_i(a_i' x + b_i)   over  ||x||_inf <= box_radius.

    ``losses`` may be one spec applied to every term or one spec per term;
    specs are strings ("abs", "hinge") or tuples (("quantile", 0.3)).
    ``z_cap`` bounds the epigraph variables; when None a cap large enough to
    never bind at the optimum is derived from the data.
    """

    data: np.ndarray
    offsets: np.ndarray
    losses: Union[LossSpec, Sequence[LossSpec]] = "abs"
    box_radius: float = 1.0
    z_cap: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        self.offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        k = self.data.shape[0]
        if self.offsets.shape != (k,):
            raise ValueError(f"offsets have shape {self.offsets.shape}, "
                             f"expected ({k},)")
        if not (np.isfinite(self.data).all() and np.isfinite(self.offsets).all()):
            raise ValueError("data and offsets must be finite")
        if isinstance(self.losses, (str, tuple)):
            self.losses = [_normalize_loss(self.losses)] * k
        else:
            self.losses = [_normalize_loss(sp) for sp in self.losses]
            if len(self.losses) != k:
                raise ValueError(f"{len(self.losses)} loss specs for {k} terms")
        self.box_radius = float(self.box_radius)
        if not (self.box_radius > 0):
            raise ValueError("box_radius must be positive")

    @property
    def terms(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def erm_objective(erm: ErmInstance, x: np.ndarray) -> float:
    """sum_i f_i(a_i' x + b_i) at a decision vector x."""
    y = erm.data @ np.asarray(x, dtype=float) + erm.offsets
    return float(sum(loss_value(sp, yi) for sp, yi in zip(erm.losses, y)))


def erm_decision(erm: ErmInstance, x_std: Union[np.ndarray, Solution]) -> np.ndarray:
    """The decision-variable part of a standard-form iterate or Solution."""
    if isinstance(x_std, Solution):
        x_std = x_std.x
    return np.asarray(x_std, dtype=float)[:erm.dim].copy()


def _newton_center(grad: Callable[[np.ndarray], np.ndarray],
                   hess: Callable[[np.ndarray], np.ndarray],
                   x0: np.ndarray, tol: float = 1e-10,
                   max_iter: int = 200) -> np.ndarray:
    """Damped Newton minimization of a self-concordant function.

    The step length 1/(1 + decrement) keeps iterates inside the domain, so no
    line search or domain checks are needed.
    """
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        g = grad(x)
        H = hess(x)
        step = -np.linalg.solve(H, g)
        dec = math.sqrt(max(float(g @ -step), 0.0))
        if dec < tol:
            return x
        x += step / (1.0 + dec)
    raise RuntimeError(f"analytic-center Newton did not reach {tol} "
                       f"in {max_iter} iterations (decrement {dec:.2e})")


def _wedge_barrier(pieces: Sequence[tuple[float, float]], z_cap: float,
                   y_bound: Optional[float] = None) -> Barrier:
    """Barrier for the capped epigraph {(y, z): max_j(p_j y + q_j) < z < z_cap}.

    -sum_j log(z - p_j y - q_j) - log(z_cap - z), plus a box term on y when
    the pieces alone leave y unbounded (all slopes of one sign, e.g. hinge).
    """
    P = np.asarray([[p, q] for p, q in pieces], dtype=float)
    z_cap = float(z_cap)

    def _gaps(v: np.ndarray) -> tuple[np.ndarray, float]:
        y, z = v
        return z - P[:, 0] * y - P[:, 1], z_cap - z

    def _value(v):
        d, e = _gaps(v)
        out = -np.log(d).sum() - math.log(e)
        if y_bound is not None:
            out -= math.log(y_bound - v[0]) + math.log(y_bound + v[0])
        return out

    def _grad(v):
        d, e = _gaps(v)
        gy = float(np.sum(P[:, 0] / d))
        gz = float(-np.sum(1.0 / d)) + 1.0 / e
        if y_bound is not None:
            gy += 1.0 / (y_bound - v[0]) - 1.0 / (y_bound + v[0])
        return np.array([gy, gz])

    def _hess(v):
        d, e = _gaps(v)
        hyy = float(np.sum((P[:, 0] / d) ** 2))
        hyz = float(-np.sum(P[:, 0] / d ** 2))
        hzz = float(np.sum(1.0 / d ** 2)) + 1.0 / e ** 2
        if y_bound is not None:
            hyy += 1.0 / (y_bound - v[0]) ** 2 + 1.0 / (y_bound + v[0]) ** 2
        return np.array([[hyy, hyz], [hyz, hzz]])

    def _interior(v):
        d, e = _gaps(v)
        ok = bool(d.min() > 0 and e > 0)
        if y_bound is not None:
            ok = ok and abs(float(v[0])) < y_bound
        return ok

    f0 = float(P[:, 1].max())  # loss value at y = 0
    if f0 >= z_cap:
        raise ValueError(f"z_cap={z_cap} leaves no interior (loss at 0 is {f0})")
    start = np.array([0.0, 0.5 * (f0 + z_cap)])
    center = _newton_center(_grad, _hess, start)
    nu = len(pieces) + 1 + (2 if y_bound is not None else 0)
    return custom_barrier(dim=2, nu=nu, value=_value, grad=_grad, hess=_hess,
                          interior=_interior, center=center)


def erm_to_standard(erm: ErmInstance) -> StandardProblem:
    """Epigraph reformulation: min sum_i z_i over y = A x + b, f_i(y_i) <= z_i.

    Each decision coordinate gets a box barrier on [-R, R]; each term a 2-D
    (y_i, z_i) block whose barrier carves the capped epigraph of its loss.
    Rows of the constraint matrix read y_i - a_i' x = b_i, so A has full row
    rank by construction (each row owns a distinct y column).
    """
    k, p = erm.terms, erm.dim
    R = erm.box_radius
    a_norms = np.linalg.norm(erm.data, axis=1)
    y_reach = float(np.abs(erm.data).sum(axis=1).max(initial=0.0) * R
                    + np.abs(erm.offsets).max(initial=0.0))
    all_pieces = [loss_pieces(sp) for sp in erm.losses]
    f_reach = max(abs(pp) * y_reach + abs(q)
                  for pieces in all_pieces for pp, q in pieces)
    if erm.z_cap is not None:
        z_cap = float(erm.z_cap)
    else:
        z_cap = max(4.0 * math.sqrt(k) * max(a_norms.max(initial=0.0), 1.0) * R,
                    2.0 * (f_reach + 1.0))

    bars: list[Barrier] = [log_box(-R, R) for _ in range(p)]
    y_caps: list[float] = []
    for pieces in all_pieces:
        slopes = [pp for pp, _ in pieces]
        # a wedge with slopes of both signs pins |y| via the z cap already
        two_sided = min(slopes) < 0 < max(slopes)
        y_bound = None if two_sided else 2.0 * (y_reach + 1.0)
        bars.append(_wedge_barrier(pieces, z_cap, y_bound))
        if two_sided:
            up = [(z_cap - q) / pp for pp, q in pieces if pp > 0]
            dn = [(z_cap - q) / pp for pp, q in pieces if pp < 0]
            y_caps.append(max(min(up), -max(dn)))
        else:
            y_caps.append(y_bound)

    A = np.zeros((k, p + 2 * k))
    for i in range(k):
        A[i, :p] = -erm.data[i]
        A[i, p + 2 * i] = 1.0
    c = np.zeros(p + 2 * k)
    c[p + 1::2] = 1.0
    r_diam = math.sqrt(p * R * R + sum(yc * yc + z_cap * z_cap for yc in y_caps))
    return StandardProblem(
        A=A, b=erm.offsets.copy(), c=c, barriers=bars, R_diam=r_diam,
        name=(erm.name + "+standard") if erm.name else "erm-standard",
    )


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    """Outcome of structural checks; empty ``failures`` means clean."""

    failures: list[str]
    rank: int
    d: int
    sigma_min: float

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok


def validate(problem: StandardProblem,
             rank_tol: float = DEFAULTS.rank_tol) -> ValidationReport:
    """Structural health checks: finite data, consistent shapes, full row rank.

    Rank is decided by singular values relative to the largest; when A is
    rank-deficient the report names a set of rows whose removal restores
    independence (via a pivoted QR of A').
    """
    failures: list[str] = []
    for label, arr in (("A", problem.A), ("b", problem.b), ("c", problem.c)):
        if not np.isfinite(arr).all():
            failures.append(f"{label} contains non-finite entries")
    if problem.d > problem.n:
        failures.append(f"more constraints ({problem.d}) than variables "
                        f"({problem.n}); A cannot have full row rank")
    sigma = np.linalg.svd(problem.A, compute_uv=False) if problem.A.size else np.array([0.0])
    cutoff = rank_tol * max(float(sigma[0]), 1.0)
    rank = int(np.sum(sigma > cutoff))
    if rank < problem.d:
        _, r, piv = scipy.linalg.qr(problem.A.T, pivoting=True, mode="economic")
        dependent = sorted(int(j) for j in piv[rank:])
        failures.append(f"A has row rank {rank} < {problem.d}; "
                        f"dependent rows {dependent}")
    for i, bar in enumerate(problem.barriers):
        if bar.center is None:
            failures.append(f"block {i} ('{bar.kind}') has no analytic center; "
                            f"embedding cannot construct an initial point")
    return ValidationReport(
        failures=failures, rank=rank, d=problem.d,
        sigma_min=float(sigma[min(problem.d, len(sigma)) - 1]) if problem.d else 0.0,
    )


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------

def random_lp(n: int = 16, d: Optional[int] = None, seed: int = 0,
              box: float = 1.0, name: Optional[str] = None) -> StandardProblem:
    """Random box-constrained LP, feasible by construction.

    Constraints pass through a sampled interior witness (drawn well inside the
    box), so the feasible region always has nonempty interior, and the box
    barriers keep it bounded.
    """
    if d is None:
        d = max(1, n // 3)
    if not (1 <= d <= n):
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, n))
    witness = rng.uniform(-0.4 * box, 0.4 * box, size=n)
    c = rng.standard_normal(n)
    return StandardProblem(
        A=A, b=A @ witness, c=c,
        barriers=[log_box(-box, box) for _ in range(n)],
        R_diam=math.sqrt(n) * box,
        name=name or f"random-lp-n{n}-d{d}-seed{seed}",
    )


def _regression_instance(p: int, terms: int, seed: int, box: float,
                         noise: float, losses, tag: str) -> ErmInstance:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((terms, p))
    truth = rng.uniform(-0.5 * box, 0.5 * box, size=p)
    targets = X @ truth + noise * rng.standard_normal(terms)
    # term value is a_i'x + b_i; offsets make it the signed residual
    return ErmInstance(data=X, offsets=-targets, losses=losses, box_radius=box,
                       name=f"{tag}-p{p}-k{terms}-seed{seed}")


def l1_regression(p: int = 4, terms: int = 12, seed: int = 0,
                  box: float = 1.0, noise: float = 0.1) -> ErmInstance:
    """Least-absolute-deviations regression as an ErmInstance."""
    return _regression_instance(p, terms, seed, box, noise, "abs", "l1")


def quantile_regression(p: int = 4, terms: int = 12, theta: float = 0.5,
                        seed: int = 0, box: float = 1.0,
                        noise: float = 0.1) -> ErmInstance:
    """Quantile (pinball-loss) regression at level theta as an ErmInstance."""
    return _regression_instance(p, terms, seed, box, noise,
                                ("quantile", theta), f"quantile{theta:g}")
