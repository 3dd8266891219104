"""Robust interior-point solver for block-separable convex programs.

Public surface is re-exported here; see README for a tour.
"""
from .config import DEFAULTS, Tolerances, eps_mp_default, sketch_width_default
from .errors import (
    CertificateInvalid,
    FactorizationFailure,
    Infeasible,
    IterationLimit,
    MissingAnalyticCenter,
    NumericalBreakdown,
    OutOfDomain,
    RipmError,
    SingularBlock,
    Unbounded,
    UnsupportedLoss,
    UpdateSingular,
)
from .barriers import (
    Barrier,
    BlockBarriers,
    ball,
    custom_barrier,
    epigraph_abs,
    from_tag,
    log_box,
    log_positive,
)
from .blocklin import BlockDiagMatrix, BlockStructure
from .cpm import CentralPathMaintenance, UpdateInfo
from .problem import (
    ErmInstance,
    ModifiedProblem,
    Solution,
    StandardProblem,
    build_modified,
    erm_decision,
    erm_objective,
    erm_to_standard,
    extract_solution,
    gap_certificate,
    l1_regression,
    quantile_regression,
    random_lp,
    validate,
)
from .rcp import PathParams, solve
from .sketch import SketchBank, create_bank, identity_bank

__version__ = "0.1.0"
