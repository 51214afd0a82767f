"""Shared domain types for composite regularized minimization.

The objective throughout is F(x) = f(x) + mu * R(x) with a smooth
(possibly nonconvex) f and a nonsmooth R that is the l1 norm, the l2
norm, or the nuclear norm of the iterate viewed as a matrix.  Iterates
are always flat float64 vectors; the nuclear case reshapes column-major.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .prox import small_svd

Evaluator = Callable[[np.ndarray], tuple[float, np.ndarray]]


class RegKind(enum.Enum):
    """Regularizer family applied on top of the smooth term."""

    L1 = "l1"
    L2_NORM = "l2"
    NUCLEAR = "nuclear"


class BBVariant(enum.Enum):
    """Spectral coefficient formula: s'y/s's (BB1) or y'y/s'y (BB2)."""

    BB1 = "bb1"
    BB2 = "bb2"


class TerminationReason(enum.Enum):
    DIRECTION_SMALL = "direction_small"
    RELATIVE_CHANGE_SMALL = "relative_change_small"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILURE = "line_search_failure"


class EvaluationError(RuntimeError):
    """A smooth objective produced a non-finite value or gradient."""


@dataclass(frozen=True)
class SmoothObjective:
    """Smooth term f; one call to value_and_grad returns (f(x), grad f(x))."""

    n: int
    value_and_grad: Evaluator


@dataclass(frozen=True)
class RegularizerSpec:
    """Regularizer kind, trade-off weight, and matrix shape for nuclear."""

    kind: RegKind
    mu: float
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if self.kind is RegKind.NUCLEAR and (self.rows <= 0 or self.cols <= 0):
            raise ValueError("nuclear regularizer requires positive rows and cols")

    def check_dimension(self, n: int) -> None:
        if self.kind is RegKind.NUCLEAR and self.rows * self.cols != n:
            raise ValueError(
                f"nuclear shape {self.rows}x{self.cols} incompatible with dimension {n}"
            )

    def as_matrix(self, x: np.ndarray) -> np.ndarray:
        """Iterate reinterpreted as a rows x cols matrix (column-major)."""
        self.check_dimension(x.size)
        return np.reshape(x, (self.rows, self.cols), order="F")


@dataclass(frozen=True)
class CompositeProblem:
    """A smooth objective paired with a regularizer spec."""

    smooth: SmoothObjective
    reg: RegularizerSpec

    def __post_init__(self):
        self.reg.check_dimension(self.smooth.n)

    @property
    def n(self) -> int:
        return self.smooth.n


@dataclass(frozen=True)
class SolverConfig:
    """All solver tunables.

    h scales the linearized regularizer inside the quadratic model (h = 1
    makes the l1 term exact); rho and delta are the backtracking factor
    and sufficient-decrease constant; m_tilde is the nonmonotone window
    size (0 reduces the test to monotone Armijo); lambda_min/lambda_max
    clamp the spectral coefficient; tol_d stops on a small direction norm
    and tol_x on a small relative step.
    """

    h: float = 1.0
    rho: float = 0.35
    delta: float = 1e-4
    m_tilde: int = 5
    lambda_min: float = 1e-20
    lambda_max: float = 1e20
    tol_d: float = 1e-8
    tol_x: float = 0.0
    max_iter: int = 10000
    max_backtracks: int = 50
    bb_variant: BBVariant = BBVariant.BB1
    lambda0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.h <= 1.0:
            raise ValueError("h must lie in (0, 1]")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.m_tilde < 0:
            raise ValueError("m_tilde must be nonnegative")
        if not 0.0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")
        if self.tol_d < 0 or self.tol_x < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be positive")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")

    @classmethod
    def preset(cls, name: str) -> "SolverConfig":
        """Named parameter bundles used by the experiment drivers.

        ``cuter``  tol_d=1e-8, tol_x off, h=1, lambda in [1e-20, 1e20];
        ``cs``     tol_d off, tol_x=1e-4, h=1e-2, lambda in [1e-30, 1e30];
        ``cs-dct`` same as ``cs`` but h=0.8 and delta=1e-5.
        All three use rho=0.35, m_tilde=5 and cap at 10000 iterations.
        """
        if name == "cuter":
            return cls()
        if name == "cs":
            return cls(
                h=1e-2, tol_d=0.0, tol_x=1e-4, lambda_min=1e-30, lambda_max=1e30
            )
        if name == "cs-dct":
            return cls(
                h=0.8, delta=1e-5, tol_d=0.0, tol_x=1e-4,
                lambda_min=1e-30, lambda_max=1e30,
            )
        raise ValueError(f"unknown preset {name!r}")


PRESET_NAMES = ("cuter", "cs", "cs-dct")


@dataclass
class SolverState:
    """Mutable per-run state: iterate, gradient, spectral coefficient,
    nonmonotone window of recent F values, and the latest secant pair."""

    x: np.ndarray
    grad: np.ndarray
    f_val: float
    F_val: float
    lam: float
    window: deque = field(default_factory=deque)
    s_prev: Optional[np.ndarray] = None
    y_prev: Optional[np.ndarray] = None
    k: int = 0


@dataclass(frozen=True)
class IterationRecord:
    """One trace row per accepted iteration."""

    k: int
    F: float
    norm_d: float
    alpha: float
    lam: float
    backtracks: int
    nf: int
    elapsed: float
    rel_err: Optional[float] = None


def regularizer_raw(spec: RegularizerSpec, x: np.ndarray) -> float:
    """Unweighted R(x) for the spec's kind (no mu factor)."""
    if spec.kind is RegKind.L1:
        return float(np.abs(x).sum())
    if spec.kind is RegKind.L2_NORM:
        return float(np.linalg.norm(x))
    _, sigma, _ = small_svd(spec.as_matrix(np.asarray(x, dtype=float)))
    return float(sigma.sum())


def regularizer_value(spec: RegularizerSpec, x: np.ndarray) -> float:
    """mu * R(x); the dimension must be compatible with the kind."""
    spec.check_dimension(np.size(x))
    return spec.mu * regularizer_raw(spec, x)


def evaluate(
    problem: CompositeProblem, x: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Evaluate the composite objective at x.

    Returns ``(f, grad, F)`` where grad is the gradient of the smooth
    term only (the regularizer is never differentiated) and
    ``F = f + regularizer_value``.  Raises :class:`EvaluationError` when
    f or a gradient component is non-finite, naming the offending index.
    """
    x = np.asarray(x, dtype=float)
    n = problem.n
    if x.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    f, grad = problem.smooth.value_and_grad(x)
    f = float(f)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != (n,):
        raise ValueError(f"gradient has shape {grad.shape}, expected ({n},)")
    if not np.isfinite(f):
        raise EvaluationError("objective value is non-finite")
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise EvaluationError(f"gradient component {bad} is non-finite")
    return f, grad, f + regularizer_value(problem.reg, x)
