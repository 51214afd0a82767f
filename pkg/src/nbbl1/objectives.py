"""Smooth objectives with analytic gradients.

Least squares over an abstract linear operator, logistic loss, and five
standard nonconvex unconstrained test problems (VARDIM, COSINE, GENROSE,
WOODS, CHAINWOO) with their published starting points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import SmoothObjective


class LinearOperator:
    """Abstract m x n real linear map with forward and adjoint products."""

    def __init__(self, m: int, n: int):
        self.m = m
        self.n = n

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class MatrixOperator(LinearOperator):
    """Dense matrix operator; forward/adjoint are plain (transpose) products."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValueError("expected a 2-d array")
        super().__init__(*matrix.shape)
        self.matrix = matrix

    def forward(self, x):
        return self.matrix @ x

    def adjoint(self, y):
        return self.matrix.T @ y


def dense_operator(matrix: np.ndarray) -> MatrixOperator:
    """Wrap a dense matrix as a LinearOperator."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix entries must be finite")
    return MatrixOperator(matrix)


def least_squares(op: LinearOperator, b: np.ndarray) -> SmoothObjective:
    """f(x) = 0.5*||A x - b||_2^2 with gradient A'(A x - b).

    Each evaluation costs one forward and one adjoint application.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (op.m,):
        raise ValueError(f"observation has shape {b.shape}, expected ({op.m},)")

    def value_and_grad(x):
        r = op.forward(x) - b
        return 0.5 * float(r @ r), op.adjoint(r)

    return SmoothObjective(n=op.n, value_and_grad=value_and_grad)


def logistic_loss(
    data: np.ndarray, labels: np.ndarray, with_intercept: bool = False
) -> SmoothObjective:
    """Logistic loss sum_i log(1 + exp(-(x'a_i + b) y_i)) over labels in {-1,+1}.

    Stable for large margins via logaddexp/expit.  When ``with_intercept``
    is set the intercept is appended as the last optimization coordinate of
    the smooth loss; note the solver's regularizer still applies uniformly
    to every coordinate, intercept included.
    """
    data = np.asarray(data, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if data.ndim != 2:
        raise ValueError("data must be an m x n matrix")
    if labels.shape != (data.shape[0],):
        raise ValueError("labels must match the number of rows in data")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("labels must lie in {-1, +1}")
    m, n = data.shape
    dim = n + 1 if with_intercept else n

    def value_and_grad(w):
        scores = data @ w[:n] + (w[n] if with_intercept else 0.0)
        margins = labels * scores
        f = float(np.logaddexp(0.0, -margins).sum())
        dscore = -labels * expit(-margins)
        g = data.T @ dscore
        if with_intercept:
            g = np.append(g, dscore.sum())
        return f, g

    return SmoothObjective(n=dim, value_and_grad=value_and_grad)


@dataclass(frozen=True)
class TestProblem:
    """A named test objective with its standard starting point."""

    name: str
    n: int
    x0: np.ndarray
    smooth: SmoothObjective


def _vardim(n):
    idx = np.arange(1, n + 1, dtype=float)

    def value_and_grad(x):
        e = x - 1.0
        t = float(idx @ e)
        f = float(e @ e) + t * t + t ** 4
        g = 2.0 * e + (2.0 * t + 4.0 * t ** 3) * idx
        return f, g

    return value_and_grad, 1.0 - idx / n


def _cosine(n):
    def value_and_grad(x):
        u = x[:-1] ** 2 - 0.5 * x[1:]
        s = np.sin(u)
        f = float(np.cos(u).sum())
        g = np.zeros_like(x)
        g[:-1] -= 2.0 * x[:-1] * s
        g[1:] += 0.5 * s
        return f, g

    return value_and_grad, np.ones(n)


def _genrose(n):
    # 1 + sum_{i>=2} 100(x_i - x_{i-1}^2)^2 + (x_i - 1)^2, minimum 1 at ones
    def value_and_grad(x):
        r = x[1:] - x[:-1] ** 2
        q = x[1:] - 1.0
        f = 1.0 + 100.0 * float(r @ r) + float(q @ q)
        g = np.zeros_like(x)
        g[1:] += 200.0 * r + 2.0 * q
        g[:-1] -= 400.0 * x[:-1] * r
        return f, g

    return value_and_grad, np.arange(1, n + 1, dtype=float) / (n + 1)


def _woods_terms(x1, x2, x3, x4):
    a = x2 - x1 ** 2
    b = 1.0 - x1
    c = x4 - x3 ** 2
    d = 1.0 - x3
    e = x2 + x4 - 2.0
    ff = x2 - x4
    f = (
        100.0 * float(a @ a)
        + float(b @ b)
        + 90.0 * float(c @ c)
        + float(d @ d)
        + 10.0 * float(e @ e)
        + 0.1 * float(ff @ ff)
    )
    g1 = -400.0 * x1 * a - 2.0 * b
    g2 = 200.0 * a + 20.0 * e + 0.2 * ff
    g3 = -360.0 * x3 * c - 2.0 * d
    g4 = 180.0 * c + 20.0 * e - 0.2 * ff
    return f, g1, g2, g3, g4


def _woods(n):
    def value_and_grad(x):
        x1, x2, x3, x4 = x[0::4], x[1::4], x[2::4], x[3::4]
        f, g1, g2, g3, g4 = _woods_terms(x1, x2, x3, x4)
        g = np.empty_like(x)
        g[0::4], g[1::4], g[2::4], g[3::4] = g1, g2, g3, g4
        return f, g

    return value_and_grad, np.tile([-3.0, -1.0], n // 2)


def _chainwoo(n):
    # Chained Woods: blocks overlap by two variables; minimum 1 at ones.
    start = np.arange(0, n - 3, 2)

    def value_and_grad(x):
        x1, x2, x3, x4 = x[start], x[start + 1], x[start + 2], x[start + 3]
        f, g1, g2, g3, g4 = _woods_terms(x1, x2, x3, x4)
        g = np.zeros_like(x)
        np.add.at(g, start, g1)
        np.add.at(g, start + 1, g2)
        np.add.at(g, start + 2, g3)
        np.add.at(g, start + 3, g4)
        return 1.0 + f, g

    x0 = np.full(n, -2.0)
    x0[:4] = [-3.0, -1.0, -3.0, -1.0]
    return value_and_grad, x0


def _admissible(name, n):
    if name == "VARDIM":
        return n >= 1
    if name in ("COSINE", "GENROSE"):
        return n >= 2
    if name == "WOODS":
        return n >= 4 and n % 4 == 0
    if name == "CHAINWOO":
        return n >= 4 and n % 2 == 0
    return False


_BUILDERS = {
    "VARDIM": _vardim,
    "COSINE": _cosine,
    "GENROSE": _genrose,
    "WOODS": _woods,
    "CHAINWOO": _chainwoo,
}

CUTER_NAMES = tuple(_BUILDERS)


def cuter_problem(name: str, n: int) -> TestProblem:
    """Standard nonconvex test problem with its published starting point.

    WOODS needs n divisible by 4, CHAINWOO an even n >= 4, GENROSE and
    COSINE n >= 2.
    """
    key = name.upper()
    if key not in _BUILDERS:
        raise ValueError(f"unknown test problem {name!r}; choose from {CUTER_NAMES}")
    if not _admissible(key, n):
        raise ValueError(f"dimension {n} not admissible for {key}")
    value_and_grad, x0 = _BUILDERS[key](n)
    return TestProblem(
        name=key, n=n, x0=np.asarray(x0, dtype=float),
        smooth=SmoothObjective(n=n, value_and_grad=value_and_grad),
    )
