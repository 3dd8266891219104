"""Numerical tolerances and size-dependent defaults.

All knobs live on one frozen dataclass so call sites can thread a single
object through; the module-level DEFAULTS instance is what you get when you
pass nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

#: Hard ceiling on individual block dimension.  The method is designed for
#: many small blocks; big blocks belong in their own factorization regime.
MAX_BLOCK_DIM = 4


@dataclass(frozen=True)
class Tolerances:
    sym_tol: float = 1e-9        # symmetry check for block matrices
    psd_tol: float = 1e-9        # allowed negative eigenvalue slack for PSD tags
    pd_tol: float = 1e-12        # minimum eigenvalue to count as positive definite
    solve_tol: float = 1e-8      # relative residual allowed for linear solves
    rank_tol: float = 1e-10      # rank decisions (row-rank checks, vertex bases)
    fd_tol: float = 1e-5         # relative error allowed in finite-difference checks
    sc_tol: float = 1e-7         # slack for self-concordance consequence checks
    domain_margin: float = 1e-12  # how far inside a barrier domain a point must be

    # Cholesky jitter escalation: base*trace/d, multiplied by jitter_growth
    # up to jitter_retries times before FactorizationFailure.
    jitter_base: float = 1e-12
    jitter_growth: float = 10.0
    jitter_retries: int = 3


DEFAULTS = Tolerances()


def eps_mp_default(n: int) -> float:
    """Maintenance drift tolerance: 1/max(4, ceil(log^2 n)), kept below 1/4."""
    if n < 1:
        raise ValueError("n must be positive")
    denom = max(4.0, math.ceil(math.log(max(n, 2)) ** 2))
    return min(1.0 / denom, 0.25 - 1e-9)


def sketch_width_default(n: int) -> int:
    """Default sketch width ceil(sqrt(n)*log^2 n), capped at n.

    Beyond n columns a sign sketch costs more than applying the exact
    projection, so the cap loses nothing at the sizes this library targets.
    """
    if n < 1:
        raise ValueError("n must be positive")
    raw = math.ceil(math.sqrt(n) * math.log(max(n, 2)) ** 2)
    return max(1, min(raw, n))


def bank_count_default(n: int) -> int:
    """Number of pre-drawn sketches banked per rebuild: ceil(sqrt(n)) + 8."""
    return math.ceil(math.sqrt(max(n, 1))) + 8
