"""Self-concordant barriers for the supported block domains.

Each barrier owns value/gradient/Hessian evaluators over the interior of its
domain, its parameter nu, and (when the domain is bounded) the analytic
center.  The two consequences of self-concordance the solver relies on — the
Hessian stability sandwich under small local-norm steps and the dual-norm
gradient bound ||grad||*_x <= sqrt(nu) — are exposed as check predicates and
exercised statistically by the test suite.

Supported kinds and their string tags (used by the instance file format):

    log_positive   {x > 0},        -log x,                    nu = 1
    log_box        {l < x < u},    -log(x-l) - log(u-x),      nu = 2
    ball           {||x|| < r},    -log(1 - ||x||^2/r^2),     nu = 2
    epigraph_abs   {(y,z): |y|<z}, -log(z^2 - y^2),           nu = 2
    custom         user evaluators with declared nu
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .blocklin import BlockDiagMatrix, BlockStructure
from .config import DEFAULTS, Tolerances
from .errors import MissingAnalyticCenter, OutOfDomain

__all__ = [
    "Barrier",
    "log_positive",
    "log_box",
    "ball",
    "epigraph_abs",
    "custom_barrier",
    "from_tag",
    "BlockBarriers",
    "check_hessian_stability",
    "check_gradient_bound",
]


@dataclass(frozen=True)
class Barrier:
    """A self-concordant barrier on the interior of a convex block domain."""

    kind: str
    dim: int
    nu: float
    _value: Callable[[np.ndarray], float]
    _grad: Callable[[np.ndarray], np.ndarray]
    _hess: Callable[[np.ndarray], np.ndarray]
    _interior: Callable[[np.ndarray, float], bool]
    center: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nu < 1.0:
            raise ValueError(f"barrier parameter nu={self.nu} must be >= 1")
        if self.dim < 1:
            raise ValueError("barrier dimension must be >= 1")

    # -- evaluation --------------------------------------------------------

    def interior(self, x: np.ndarray, margin: float = DEFAULTS.domain_margin) -> bool:
        x = self._coerce(x)
        return bool(self._interior(x, margin))

    def value(self, x: np.ndarray) -> float:
        x = self._require_interior(x)
        return float(self._value(x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        x = self._require_interior(x)
        return np.asarray(self._grad(x), dtype=float)

    def hess(self, x: np.ndarray) -> np.ndarray:
        x = self._require_interior(x)
        H = np.asarray(self._hess(x), dtype=float)
        return 0.5 * (H + H.T)

    def analytic_center(self) -> np.ndarray:
        if self.center is None:
            raise MissingAnalyticCenter(
                f"barrier kind '{self.kind}' has no analytic center")
        return np.array(self.center, dtype=float)

    # -- plumbing ----------------------------------------------------------

    def _coerce(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, barrier dim is {self.dim}")
        return x

    def _require_interior(self, x) -> np.ndarray:
        x = self._coerce(x)
        if not self._interior(x, DEFAULTS.domain_margin):
            raise OutOfDomain(f"point {x} not interior to '{self.kind}' domain")
        return x


# ---------------------------------------------------------------------------
# concrete kinds
# ---------------------------------------------------------------------------

def log_positive() -> Barrier:
    """-log x on {x > 0}; nu = 1.  Unbounded domain: no analytic center."""
    return Barrier(
        kind="log_positive", dim=1, nu=1.0,
        _value=lambda x: -math.log(x[0]),
        _grad=lambda x: np.array([-1.0 / x[0]]),
        _hess=lambda x: np.array([[1.0 / x[0] ** 2]]),
        _interior=lambda x, m: x[0] > m,
    )


def log_box(lo: float, hi: float) -> Barrier:
    """-log(x-lo) - log(hi-x) on {lo < x < hi}; nu = 2; center at the midpoint."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError(f"empty box [{lo}, {hi}]")
    return Barrier(
        kind="log_box", dim=1, nu=2.0,
        _value=lambda x: -math.log(x[0] - lo) - math.log(hi - x[0]),
        _grad=lambda x: np.array([-1.0 / (x[0] - lo) + 1.0 / (hi - x[0])]),
        _hess=lambda x: np.array([[1.0 / (x[0] - lo) ** 2 + 1.0 / (hi - x[0]) ** 2]]),
        _interior=lambda x, m: (x[0] - lo > m) and (hi - x[0] > m),
        center=np.array([(lo + hi) / 2.0]),
        params={"lo": lo, "hi": hi},
    )


def ball(dim: int, radius: float = 1.0) -> Barrier:
    """-log(1 - ||x||^2/r^2) on the open ball of the given radius; nu = 2."""
    r2 = float(radius) ** 2
    if r2 <= 0:
        raise ValueError("radius must be positive")

    def _q(x):
        return 1.0 - float(x @ x) / r2

    def _grad(x):
        return (2.0 / r2) * x / _q(x)

    def _hess(x):
        q = _q(x)
        return (2.0 / (r2 * q)) * np.eye(len(x)) + (4.0 / (r2 * r2 * q * q)) * np.outer(x, x)

    return Barrier(
        kind="ball", dim=int(dim), nu=2.0,
        _value=lambda x: -math.log(_q(x)),
        _grad=_grad, _hess=_hess,
        _interior=lambda x, m: _q(x) > m,
        center=np.zeros(int(dim)),
        params={"radius": float(radius)},
    )


def epigraph_abs() -> Barrier:
    """-log(z^2 - y^2) on {(y, z): |y| < z}; nu = 2.  Cone: no analytic center."""

    def _grad(x):
        y, z = x
        q = z * z - y * y
        return np.array([2.0 * y / q, -2.0 * z / q])

    def _hess(x):
        y, z = x
        q = z * z - y * y
        return np.array([
            [2.0 / q + 4.0 * y * y / (q * q), -4.0 * y * z / (q * q)],
            [-4.0 * y * z / (q * q), -2.0 / q + 4.0 * z * z / (q * q)],
        ])

    return Barrier(
        kind="epigraph_abs", dim=2, nu=2.0,
        _value=lambda x: -math.log(x[1] ** 2 - x[0] ** 2),
        _grad=_grad, _hess=_hess,
        _interior=lambda x, m: (x[1] > 0) and (x[1] ** 2 - x[0] ** 2 > m),
    )


def custom_barrier(dim: int, nu: float,
                   value: Callable[[np.ndarray], float],
                   grad: Callable[[np.ndarray], np.ndarray],
                   hess: Callable[[np.ndarray], np.ndarray],
                   interior: Callable[[np.ndarray], bool],
                   center: Optional[np.ndarray] = None) -> Barrier:
    """User-supplied barrier.  nu is declared, not derived; the library checks
    the gradient bound statistically and warns rather than rejects, since nu
    cannot be computed from black-box evaluators."""
    return Barrier(
        kind="custom", dim=int(dim), nu=float(nu),
        _value=value, _grad=grad, _hess=hess,
        _interior=lambda x, m: bool(interior(x)),
        center=None if center is None else np.asarray(center, dtype=float),
    )


_TAG_BUILDERS = {
    "log_positive": lambda params: log_positive(),
    "log_box": lambda params: log_box(params["lo"], params["hi"]),
    "ball": lambda params: ball(params.get("dim", 1), params.get("radius", 1.0)),
    "epigraph_abs": lambda params: epigraph_abs(),
}


def from_tag(tag: str, params: Optional[dict] = None) -> Barrier:
    """Build a barrier from its file-format string tag."""
    if tag == "custom":
        raise ValueError("custom barriers are library-API only, not file-loadable")
    try:
        builder = _TAG_BUILDERS[tag]
    except KeyError:
        raise ValueError(f"unknown barrier tag '{tag}'") from None
    return builder(params or {})


# ---------------------------------------------------------------------------
# self-concordance consequence checks
# ---------------------------------------------------------------------------

def check_hessian_stability(bar: Barrier, x: np.ndarray, y: np.ndarray,
                            sc_tol: float = DEFAULTS.sc_tol) -> bool:
    """Hessian sandwich under a sub-unit local step.

    With r = ||y - x||_x < 1, checks

        (1 - r)^2 H(x)  <=  H(y)  <=  (1 - r)^{-2} H(x)

    in the PSD order, to slack sc_tol relative to the largest eigenvalue in
    play.  Requires x interior (raises OutOfDomain otherwise); returns False
    if y is not interior, since the sandwich implies y must be.
    """
    Hx = bar.hess(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    step = y - x
    r = math.sqrt(max(float(step @ Hx @ step), 0.0))
    if r >= 1.0:
        raise ValueError(f"step has local norm {r:.3f} >= 1; sandwich not applicable")
    if not bar.interior(y):
        return False
    Hy = bar.hess(y)
    lo = (1.0 - r) ** 2
    scale = max(np.max(np.abs(Hx)), np.max(np.abs(Hy)), 1.0)
    slack = sc_tol * scale
    lower_ok = np.linalg.eigvalsh(Hy - lo * Hx)[0] >= -slack
    upper_ok = np.linalg.eigvalsh(Hx / lo - Hy)[0] >= -slack
    return bool(lower_ok and upper_ok)


def check_gradient_bound(bar: Barrier, x: np.ndarray,
                         sc_tol: float = DEFAULTS.sc_tol) -> bool:
    """Dual-norm gradient bound ||grad(x)||_{H(x)^{-1}} <= sqrt(nu) + sc_tol."""
    g = bar.grad(x)
    H = bar.hess(x)
    dual = math.sqrt(max(float(g @ np.linalg.solve(H, g)), 0.0))
    return dual <= math.sqrt(bar.nu) + sc_tol


# ---------------------------------------------------------------------------
# barrier products over a block structure
# ---------------------------------------------------------------------------

class BlockBarriers:
    """The product barrier phi(x) = sum_i phi_i(x_i) over a block structure."""

    def __init__(self, barriers: Sequence[Barrier]):
        if not barriers:
            raise ValueError("need at least one barrier")
        self.barriers = list(barriers)
        self.structure = BlockStructure([b.dim for b in self.barriers])
        self.nu_total = float(sum(b.nu for b in self.barriers))
        # fast path: every block scalar (dominant case for LP-style problems)
        self._all_scalar = all(b.dim == 1 for b in self.barriers)

    @property
    def m(self) -> int:
        return self.structure.m

    @property
    def n(self) -> int:
        return self.structure.n

    def block_point(self, x: np.ndarray, i: int) -> np.ndarray:
        return x[self.structure.slice(i)]

    def interior(self, x: np.ndarray, margin: float = DEFAULTS.domain_margin) -> bool:
        return all(b.interior(self.block_point(x, i), margin)
                   for i, b in enumerate(self.barriers))

    def value(self, x: np.ndarray) -> float:
        return float(sum(b.value(self.block_point(x, i))
                         for i, b in enumerate(self.barriers)))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(self.n)
        for i, b in enumerate(self.barriers):
            out[self.structure.slice(i)] = b.grad(self.block_point(x, i))
        return out

    def hessian(self, x: np.ndarray) -> BlockDiagMatrix:
        return BlockDiagMatrix(
            self.structure,
            [b.hess(self.block_point(x, i)) for i, b in enumerate(self.barriers)])

    def hessian_inverse(self, x: np.ndarray) -> BlockDiagMatrix:
        """W = (hessian)^{-1}; scalar blocks invert elementwise."""
        if self._all_scalar:
            diag = np.array([b.hess(x[i:i + 1])[0, 0]
                             for i, b in enumerate(self.barriers)])
            return BlockDiagMatrix(self.structure, list((1.0 / diag)[:, None, None]))
        return self.hessian(x).inv()

    def analytic_center(self) -> np.ndarray:
        out = np.empty(self.n)
        for i, b in enumerate(self.barriers):
            out[self.structure.slice(i)] = b.analytic_center()
        return out

    def nu_blocks(self) -> np.ndarray:
        return np.array([b.nu for b in self.barriers])
