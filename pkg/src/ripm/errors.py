"""Exception hierarchy for the solver library.

Everything raised on purpose derives from RipmError so callers can catch one
type at the CLI boundary and map it to an exit code.
"""


class RipmError(Exception):
    """Base class for all library errors."""


class SingularBlock(RipmError):
    """A block of a block-diagonal matrix is numerically singular."""

    def __init__(self, block_index: int, detail: str = ""):
        self.block_index = block_index
        msg = f"block {block_index} is numerically singular"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class FactorizationFailure(RipmError):
    """Cholesky factorization failed even after jitter escalation."""


class UpdateSingular(RipmError):
    """A Woodbury-style low-rank update hit a singular capacitance matrix.

    Callers are expected to fall back to recomputation from scratch.
    """


class OutOfDomain(RipmError):
    """A point lies outside (or too close to the boundary of) a barrier domain."""


class CertificateInvalid(RipmError):
    """The preconditions of the duality-gap certificate do not hold."""


class IterationLimit(RipmError):
    """The iteration budget was exhausted before the termination condition."""


class NumericalBreakdown(RipmError):
    """An iterate became non-finite or structurally unusable.

    Carries a diagnostics snapshot (iteration, t, offending quantities) when
    raised from the path-following loop.
    """

    def __init__(self, msg: str, snapshot: dict | None = None):
        super().__init__(msg)
        self.snapshot = dict(snapshot or {})


class Infeasible(RipmError):
    """An exhaustive search found no feasible point."""


class Unbounded(RipmError):
    """The objective is unbounded below over the feasible set."""


class UnsupportedLoss(RipmError):
    """An ERM loss specification is not one of the supported kinds."""


class MissingAnalyticCenter(RipmError):
    """A barrier without a known analytic center was used where one is required."""
