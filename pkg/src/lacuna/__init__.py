"""Certified construction of frequency-separated trigonometric block sums.

The package builds a sequence of trigonometric polynomial blocks whose
partial sums stay below an explicit uniform bound.  Each step thresholds
the running partial sum, expands the superlevel sets outward, removes
the lattice points they cover, and emits a triangular-weight block
supported on the surviving points.  Every norm the construction relies
on is tracked as a certified bracket (a lower bound from dense sampling,
an upper bound from a derivative estimate), so verification does not
trust the construction's own arithmetic.

Entry points:

* :func:`preset` / :func:`validate` build frequency plans.
* :func:`run` executes the construction; :func:`save_run` /
  :func:`load_run` round-trip run directories.
* :func:`build_report` re-checks every recorded inequality.
* ``python -m lacuna.cli`` (or the ``lacuna`` script) drives the same
  machinery from the command line.
"""

from ._version import __version__
from .circleset import ArcSet, LevelOptions, superlevel_arcs, survivors
from .construct import (
    ConstantProfile,
    RunOptions,
    RunState,
    StepRecord,
    compute_a,
    init,
    load_run,
    run,
    save_run,
    step,
    synthesize_block,
    tau_profile,
    timed_run,
)
from .errors import (
    DivergentInput,
    EmptyPlan,
    GridTooSmall,
    InvalidParam,
    LacunaError,
    LambdaCollapse,
    PlanError,
    PlanWarning,
    RatioViolation,
    ResolutionExceeded,
    UnknownPreset,
    UnreducibleBlock,
    WidthViolation,
)
from .plan import Block, FrequencyPlan, load_plan, preset, reduce_widths, save_plan, validate
from .trigpoly import (
    NormBracket,
    RealTrigPoly,
    TrigPoly,
    fejer,
    grid_eval,
    l1_norm,
    l2_norm,
    load_coeffs,
    modulate,
    point_eval,
    poly_sum,
    real_part,
    save_coeffs,
    sup_norm,
    sup_scan,
)
from .verify import (
    VerificationReport,
    Verdict,
    build_report,
    check_blocks,
    check_intermediate,
    check_majorant,
    check_parseval,
    check_theorem_bound,
    format_text,
    load_report,
    majorant_check,
    save_report,
    series_identity,
    tail_bound_check,
    theorem_rhs,
)

__all__ = [
    "__version__",
    # plans
    "Block", "FrequencyPlan", "preset", "validate", "reduce_widths",
    "save_plan", "load_plan",
    # polynomials
    "TrigPoly", "RealTrigPoly", "NormBracket", "fejer", "grid_eval",
    "point_eval", "sup_scan", "sup_norm", "l1_norm", "l2_norm",
    "modulate", "poly_sum", "real_part", "save_coeffs", "load_coeffs",
    # circle sets
    "ArcSet", "LevelOptions", "superlevel_arcs", "survivors",
    # construction
    "ConstantProfile", "RunOptions", "RunState", "StepRecord",
    "compute_a", "init", "step", "run", "timed_run", "synthesize_block",
    "tau_profile", "save_run", "load_run",
    # verification
    "Verdict", "VerificationReport", "build_report", "check_blocks",
    "check_intermediate", "check_majorant", "check_parseval",
    "check_theorem_bound", "majorant_check", "series_identity",
    "tail_bound_check", "theorem_rhs", "format_text", "save_report",
    "load_report",
    # errors
    "LacunaError", "PlanError", "EmptyPlan", "RatioViolation",
    "WidthViolation", "UnreducibleBlock", "UnknownPreset", "InvalidParam",
    "GridTooSmall", "ResolutionExceeded", "LambdaCollapse",
    "DivergentInput", "PlanWarning",
]
