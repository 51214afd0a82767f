"""Nonmonotone Barzilai-Borwein gradient solver for composite minimization.

Minimizes F(x) = f(x) + mu*R(x) with smooth (possibly nonconvex) f and R
the l1, l2 or nuclear norm, plus a compressive-sensing experiment harness
and CLI.
"""

__version__ = "0.1.0"

from .model import (
    BBVariant,
    CompositeProblem,
    EvaluationError,
    IterationRecord,
    PRESET_NAMES,
    RegKind,
    RegularizerSpec,
    SmoothObjective,
    SolverConfig,
    SolverState,
    TerminationReason,
    evaluate,
    regularizer_raw,
    regularizer_value,
)
from .prox import (
    ShrinkInput,
    SvdConvergenceError,
    block_shrink_l2,
    small_svd,
    soft_threshold,
    svt,
)
from .solver import (
    DirectionResult,
    IterationDiagnostics,
    LineSearchResult,
    RunResult,
    bb_lambda,
    compute_direction,
    line_search,
    nonmonotone_reference,
    run,
)
from .objectives import (
    CUTER_NAMES,
    LinearOperator,
    MatrixOperator,
    TestProblem,
    cuter_problem,
    dense_operator,
    least_squares,
    logistic_loss,
)
from .cs import (
    AmplitudeMode,
    CsInstance,
    ENCODERS,
    PartialDctOperator,
    RecoveryReport,
    SweepRow,
    build_cs_instance,
    component_rng,
    gen_gaussian_operator,
    gen_partial_dct_operator,
    gen_sparse_signal,
    rel_err,
    run_h_sweep,
    run_recovery,
)
