"""Closed-form shrinkage operators.

These solve the per-iteration direction subproblem for each regularizer
kind: componentwise soft-thresholding (l1), block shrinkage (l2 norm), and
singular value thresholding (nuclear norm), together with the small dense
SVD the latter requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SvdConvergenceError(RuntimeError):
    """Jacobi sweeps hit the iteration cap before orthogonalizing."""

    def __init__(self, sweeps: int, residual: float):
        super().__init__(
            f"SVD did not converge after {sweeps} sweeps "
            f"(worst off-diagonal Gram term {residual:.3e})"
        )
        self.sweeps = sweeps
        self.residual = residual


@dataclass(frozen=True)
class ShrinkInput:
    """Validated shrinkage operand: offset point v and threshold tau."""

    v: np.ndarray
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("shrinkage threshold must be nonnegative")
        if not np.all(np.isfinite(self.v)):
            raise ValueError("shrinkage input vector must be finite")


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    """Componentwise soft-thresholding sign(v) * max(|v| - tau, 0).

    Minimizes 0.5*(z - v_i)**2 + tau*|z| in each coordinate.  The
    comparison |v_i| - tau <= 0 maps exactly to 0 (no epsilon fuzz), and
    sign(0) = 0 resolves the 0 * 0/0 corner to 0.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def block_shrink_l2(v: np.ndarray, tau: float) -> np.ndarray:
    """Radial shrinkage max(||v|| - tau, 0) * v/||v||.

    Minimizes 0.5*||z - v||**2 + tau*||z||_2; returns the zero vector when
    ||v|| <= tau (including v = 0).
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm <= tau:
        return np.zeros_like(v)
    return v * ((norm - tau) / norm)


def small_svd(
    y: np.ndarray, *, gram_tol: float = 1e-12, max_sweeps: int = 60
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a small dense matrix via one-sided Jacobi rotations.

    Cyclic sweeps of plane rotations orthogonalize the columns; the
    iteration ends once a full sweep leaves every normalized off-diagonal
    Gram term |<u_p, u_q>| / (||u_p|| ||u_q||) below ``gram_tol``.

    Returns ``(u, sigma, v)`` with ``y ~ u @ np.diag(sigma) @ v.T``,
    orthonormal columns in ``u`` and ``v``, and ``sigma`` nonnegative and
    sorted nonincreasing.  Intended for desk-scale matrices (<= 200x200).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.all(np.isfinite(y)):
        raise ValueError("matrix entries must be finite")
    m, n = y.shape
    if m < n:
        u, sigma, v = small_svd(y.T, gram_tol=gram_tol, max_sweeps=max_sweeps)
        return v, sigma, u

    u = y.copy()
    v = np.eye(n)
    # Columns whose norm falls to rounding level of the (rotation-invariant)
    # Frobenius norm carry no rank; skipping them keeps the sweeps stable.
    zero_tol = float(np.linalg.norm(y)) * np.finfo(float).eps
    worst = np.inf
    for _ in range(max_sweeps):
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                np_col = float(np.linalg.norm(u[:, p]))
                nq_col = float(np.linalg.norm(u[:, q]))
                if np_col <= zero_tol or nq_col <= zero_tol:
                    continue
                upq = float(u[:, p] @ u[:, q])
                if upq == 0.0:
                    continue
                rel = abs(upq) / (np_col * nq_col)
                worst = max(worst, rel)
                if rel <= gram_tol:
                    continue
                upp = np_col * np_col
                uqq = nq_col * nq_col
                zeta = (uqq - upp) / (2.0 * upq)
                sgn = 1.0 if zeta >= 0 else -1.0
                t = sgn / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                rot = np.array([[c, s], [-s, c]])
                u[:, [p, q]] = u[:, [p, q]] @ rot
                v[:, [p, q]] = v[:, [p, q]] @ rot
        if worst <= gram_tol:
            break
    else:
        raise SvdConvergenceError(max_sweeps, worst)

    sigma = np.linalg.norm(u, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    u = u[:, order]
    v = v[:, order]

    # Normalize columns; numerically rank-deficient ones get an orthonormal
    # completion so u keeps exactly min(m, n) orthonormal columns.
    cutoff = sigma[0] * max(m, n) * np.finfo(float).eps if n > 0 else 0.0
    uu = np.zeros_like(u)
    filled: list[int] = []
    for i in range(n):
        if sigma[i] > cutoff:
            uu[:, i] = u[:, i] / sigma[i]
            filled.append(i)
    for i in range(n):
        if sigma[i] > cutoff:
            continue
        sigma[i] = 0.0
        uu[:, i] = _orthogonal_unit(uu[:, filled])
        filled.append(i)
    return uu, sigma, v


def _orthogonal_unit(b: np.ndarray) -> np.ndarray:
    """Unit vector orthogonal to the orthonormal columns of b."""
    m = b.shape[0]
    resid = np.eye(m) - b @ b.T
    scores = np.linalg.norm(resid, axis=0)
    w = resid[:, int(np.argmax(scores))]
    w = w - b @ (b.T @ w)  # second pass tightens orthogonality
    return w / np.linalg.norm(w)


def svt(y: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding: soft-threshold the singular values.

    Returns the minimizer of tau*||X||_* + 0.5*||X - y||_F**2.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    u, sigma, v = small_svd(y)
    return (u * np.maximum(sigma - tau, 0.0)) @ v.T
