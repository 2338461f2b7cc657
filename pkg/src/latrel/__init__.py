"""Exact reliability of semicoherent systems via min/max lifetime expressions."""

from .distributions import (
    DistributionSpec,
    deterministic,
    exponential,
    uniform,
    weibull,
)
from .engine import (
    IndependentOracle,
    JointSurvivalOracle,
    ReliabilityCurve,
    mttf,
    mttf_exponential_closed,
    reliability_general,
    reliability_independent,
    reliability_polynomial_eval,
    reliability_symmetric,
)
from .lattice import (
    Const,
    LatticeExpr,
    Max,
    Min,
    MobiusVector,
    PathCutSets,
    SemicoherenceError,
    SetFunction,
    StructureError,
    Var,
    bridge_system,
    check_semicoherent,
    dual,
    eval_expr,
    expr_to_setfunction,
    k_out_of_n_system,
    lmax,
    lmin,
    minimal_paths_cuts,
    mobius,
    parallel_system,
    series_system,
    setfunction_to_expr,
    structure_eval,
    substitute,
    symmetric_mobius,
    zeta,
)
from .dsl import ParseError, SystemModel, format_expr, parse_expr, parse_model, serialize_model
from .mc import EstimateWithCI, SimulationConfig, simulate

__version__ = "0.1.0"
