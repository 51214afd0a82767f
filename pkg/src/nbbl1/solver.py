"""Nonmonotone Barzilai-Borwein iteration for composite minimization.

Each step shrinks the spectrally scaled gradient point to get a descent
direction, backtracks against the maximum objective over a sliding window
of recent iterates, and refreshes the spectral coefficient from the new
secant pair.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import prox
from .model import (
    BBVariant,
    CompositeProblem,
    IterationRecord,
    RegKind,
    RegularizerSpec,
    SolverConfig,
    SolverState,
    TerminationReason,
    evaluate,
    regularizer_raw,
)


@dataclass(frozen=True)
class DirectionResult:
    """Search direction d, model decrease delta, and the shrunk point x + h*d."""

    d: np.ndarray
    delta: float
    prox_point: np.ndarray


@dataclass(frozen=True)
class LineSearchResult:
    """Accepted step: alpha = h * rho**backtracks and the new evaluation."""

    alpha: float
    x_new: np.ndarray
    F_new: float
    backtracks: int
    f_new: float
    grad_new: np.ndarray


@dataclass(frozen=True)
class IterationDiagnostics:
    """Per-iteration certificate data captured for tests and debugging."""

    k: int
    lam: float
    norm_d: float
    delta: float
    alpha: float
    F_prev: float
    F_new: float
    window_max: float


@dataclass(frozen=True)
class RunResult:
    x: np.ndarray
    reason: TerminationReason
    records: list[IterationRecord]
    f: float
    F: float
    grad: np.ndarray


def _shrink(spec: RegularizerSpec, v: np.ndarray, tau: float) -> np.ndarray:
    inp = prox.ShrinkInput(v, tau)
    if spec.kind is RegKind.L1:
        return prox.soft_threshold(inp.v, inp.tau)
    if spec.kind is RegKind.L2_NORM:
        return prox.block_shrink_l2(inp.v, inp.tau)
    shrunk = prox.svt(spec.as_matrix(inp.v), inp.tau)
    return shrunk.ravel(order="F")


def _reg_gap(spec: RegularizerSpec, x, p, hd) -> float:
    """R(p) - R(x) for p = x + h*d, computed to absolute accuracy O(eps*h*|d|).

    The true gap is bounded by the step size, so the naive difference of two
    large norms would drown it in cancellation error near convergence.
    """
    if spec.kind is RegKind.L1:
        gap = np.where(
            (x >= 0.0) & (p >= 0.0),
            hd,
            np.where((x <= 0.0) & (p <= 0.0), -hd, np.abs(p) - np.abs(x)),
        )
        return float(gap.sum())
    if spec.kind is RegKind.L2_NORM:
        den = float(np.linalg.norm(p)) + float(np.linalg.norm(x))
        return float(hd @ (p + x)) / den if den > 0.0 else 0.0
    return regularizer_raw(spec, p) - regularizer_raw(spec, x)


def compute_direction(
    x: np.ndarray,
    grad: np.ndarray,
    lam: float,
    spec: RegularizerSpec,
    h: float,
) -> DirectionResult:
    """Direction from the shrinkage of x - (h/lam)*grad with threshold mu*h/lam.

    Returns d = (prox_point - x)/h and the model decrease
    delta = grad'd + mu*(R(x + h d) - R(x))/h.  With mu = 0 this reduces
    exactly to d = -grad/lam with delta = grad'd.
    """
    if spec.mu == 0.0:
        d = -(grad / lam)
        delta = float(grad @ d)
        prox_point = x + h * d
    else:
        v = x - (h / lam) * grad
        tau = spec.mu * h / lam
        prox_point = _shrink(spec, v, tau)
        d = (prox_point - x) / h
        delta = float(grad @ d) + spec.mu * _reg_gap(spec, x, prox_point, h * d) / h
    # descent certificate; holds with a factor-2 margin in exact arithmetic
    assert delta <= -0.5 * lam * float(d @ d)
    return DirectionResult(d=d, delta=delta, prox_point=prox_point)


def bb_lambda(
    s: np.ndarray,
    y: np.ndarray,
    variant: BBVariant,
    lambda_min: float,
    lambda_max: float,
) -> float:
    """Clamped spectral coefficient from the secant pair (s, y).

    s'y > 0 gives s'y/||s||^2 (BB1) or ||y||^2/s'y (BB2) clamped to
    [lambda_min, lambda_max].  Nonpositive curvature falls back to the
    clamped curvature magnitude ||y||/||s||, which keeps the trial step at
    the scale of the local gradient change; a degenerate pair (s = 0 or
    y = 0) falls back to lambda_min.
    """
    sty = float(s @ y)
    if sty <= 0.0:
        ns = float(np.linalg.norm(s))
        ny = float(np.linalg.norm(y))
        if ns == 0.0 or ny == 0.0:
            return lambda_min
        return min(lambda_max, max(ny / ns, lambda_min))
    if variant is BBVariant.BB1:
        lam = sty / float(s @ s)
    else:
        lam = float(y @ y) / sty
    return min(lambda_max, max(lam, lambda_min))


def nonmonotone_reference(window) -> float:
    """Maximum stored objective value; the line-search comparison level."""
    if not window:
        raise ValueError("window must be nonempty")
    return max(window)


def line_search(
    problem: CompositeProblem,
    x: np.ndarray,
    window,
    d: np.ndarray,
    delta: float,
    cfg: SolverConfig,
) -> Optional[LineSearchResult]:
    """Backtrack alpha = h * rho**j against the window maximum.

    Accepts the smallest j with
    F(x + alpha*d) <= max(window) + cfg.delta * alpha * delta,
    performing j+1 fresh objective evaluations.  Returns None when j
    would exceed cfg.max_backtracks.
    """
    f_ref = nonmonotone_reference(window)
    for j in range(cfg.max_backtracks + 1):
        alpha = cfg.h * cfg.rho ** j
        x_trial = x + alpha * d
        f_t, g_t, F_t = evaluate(problem, x_trial)
        if F_t <= f_ref + cfg.delta * alpha * delta:
            return LineSearchResult(
                alpha=alpha, x_new=x_trial, F_new=F_t, backtracks=j,
                f_new=f_t, grad_new=g_t,
            )
    return None


def run(
    problem: CompositeProblem,
    x0: np.ndarray,
    cfg: SolverConfig,
    trace_sink: Optional[Callable[[IterationRecord], None]] = None,
    rel_err_fn: Optional[Callable[[np.ndarray], float]] = None,
    diagnostics: Optional[list] = None,
) -> RunResult:
    """Run the iteration from x0 until a stopping rule fires.

    Stops when ||d_k|| <= tol_d, when the relative step
    ||x_k - x_{k-1}|| / ||x_{k-1}|| drops below tol_x (skipped while the
    previous iterate is zero), at max_iter, or when the line search fails.
    The final direction is still applied before the direction test, so the
    returned point includes the last accepted step.
    One IterationRecord is emitted per accepted iteration; rel_err_fn, when
    given, fills the record's rel_err column.  diagnostics, when given,
    collects IterationDiagnostics for certificate checks.
    """
    t_start = time.perf_counter()
    x0 = np.asarray(x0, dtype=float)
    f, grad, F = evaluate(problem, x0)
    lam0 = min(cfg.lambda_max, max(cfg.lambda0, cfg.lambda_min))
    state = SolverState(
        x=x0.copy(), grad=grad, f_val=f, F_val=F, lam=lam0,
        window=deque([F], maxlen=cfg.m_tilde + 1),
    )
    records: list[IterationRecord] = []
    nf = 1
    reason = TerminationReason.MAX_ITERATIONS

    for k in range(1, cfg.max_iter + 1):
        direction = compute_direction(state.x, state.grad, state.lam, problem.reg, cfg.h)
        norm_d = float(np.linalg.norm(direction.d))
        window_max = nonmonotone_reference(state.window)
        ls = line_search(problem, state.x, state.window, direction.d, direction.delta, cfg)
        if ls is None:
            reason = TerminationReason.LINE_SEARCH_FAILURE
            break
        nf += ls.backtracks + 1
        if diagnostics is not None:
            diagnostics.append(IterationDiagnostics(
                k=k, lam=state.lam, norm_d=norm_d, delta=direction.delta,
                alpha=ls.alpha, F_prev=state.F_val, F_new=ls.F_new,
                window_max=window_max,
            ))
        prev_norm = float(np.linalg.norm(state.x))
        s = ls.x_new - state.x
        y = ls.grad_new - state.grad
        lam_used = state.lam

        state.x, state.grad = ls.x_new, ls.grad_new
        state.f_val, state.F_val = ls.f_new, ls.F_new
        state.s_prev, state.y_prev = s, y
        state.lam = bb_lambda(s, y, cfg.bb_variant, cfg.lambda_min, cfg.lambda_max)
        state.window.append(ls.F_new)
        state.k = k

        record = IterationRecord(
            k=k, F=ls.F_new, norm_d=norm_d, alpha=ls.alpha, lam=lam_used,
            backtracks=ls.backtracks, nf=nf,
            elapsed=time.perf_counter() - t_start,
            rel_err=float(rel_err_fn(ls.x_new)) if rel_err_fn is not None else None,
        )
        records.append(record)
        if trace_sink is not None:
            trace_sink(record)

        # Stopping tests come after the step: the final descent direction is
        # applied, not discarded (both rules always active, first hit wins).
        if norm_d <= cfg.tol_d:
            reason = TerminationReason.DIRECTION_SMALL
            break
        if prev_norm > 0.0 and float(np.linalg.norm(s)) / prev_norm < cfg.tol_x:
            reason = TerminationReason.RELATIVE_CHANGE_SMALL
            break

    return RunResult(
        x=state.x.copy(), reason=reason, records=records,
        f=state.f_val, F=state.F_val, grad=state.grad.copy(),
    )
