import numpy as np
import pytest

from conftest import assert_gradient_matches_fd
from nbbl1 import (
    CUTER_NAMES,
    CompositeProblem,
    RegKind,
    RegularizerSpec,
    SolverConfig,
    cuter_problem,
    dense_operator,
    least_squares,
    logistic_loss,
    run,
)

FD_DIMS = {"VARDIM": 30, "COSINE": 30, "GENROSE": 30, "WOODS": 32, "CHAINWOO": 30}


class TestDenseOperator:
    def test_identity(self):
        op = dense_operator(np.eye(3))
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(op.forward(x), x)
        np.testing.assert_array_equal(op.adjoint(x), x)

    def test_row_vector(self):
        op = dense_operator(np.array([[1.0, 2.0]]))
        np.testing.assert_array_equal(op.forward(np.array([1.0, 1.0])), [3.0])
        np.testing.assert_array_equal(op.adjoint(np.array([1.0])), [1.0, 2.0])

    def test_adjoint_consistency(self, rng):
        op = dense_operator(rng.standard_normal((5, 8)))
        for _ in range(10):
            x = rng.standard_normal(8)
            y = rng.standard_normal(5)
            lhs = float(op.forward(x) @ y)
            rhs = float(x @ op.adjoint(y))
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            dense_operator(np.array([[np.inf]]))


class TestLeastSquares:
    def test_zero_residual(self):
        smooth = least_squares(dense_operator(np.eye(2)), np.array([1.0, 2.0]))
        f, g = smooth.value_and_grad(np.array([1.0, 2.0]))
        assert f == 0.0
        np.testing.assert_array_equal(g, np.zeros(2))

    def test_hand_case(self):
        smooth = least_squares(dense_operator(np.array([[1.0, 0.0], [0.0, 2.0]])), np.zeros(2))
        f, g = smooth.value_and_grad(np.array([1.0, 1.0]))
        assert f == 2.5
        np.testing.assert_array_equal(g, [1.0, 4.0])
        assert_gradient_matches_fd(smooth, np.array([1.0, 1.0]), rtol=1e-6)

    def test_fd_random(self, rng):
        op = dense_operator(rng.standard_normal((5, 8)))
        smooth = least_squares(op, rng.standard_normal(5))
        for _ in range(3):
            assert_gradient_matches_fd(smooth, rng.standard_normal(8), rtol=1e-6)

    def test_value_is_half_residual_sq(self, rng):
        op = dense_operator(rng.standard_normal((4, 6)))
        b = rng.standard_normal(4)
        smooth = least_squares(op, b)
        x = rng.standard_normal(6)
        f, _ = smooth.value_and_grad(x)
        r = op.forward(x) - b
        assert f == 0.5 * float(r @ r)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            least_squares(dense_operator(np.eye(2)), np.zeros(3))


class TestLogisticLoss:
    def test_zero_margins(self, rng):
        data = rng.standard_normal((4, 3))
        labels = np.array([1.0, -1.0, 1.0, -1.0])
        smooth = logistic_loss(data, labels)
        f, _ = smooth.value_and_grad(np.zeros(3))
        assert f == pytest.approx(4.0 * np.log(2.0), rel=1e-15)

    def test_large_margin_limit(self):
        smooth = logistic_loss(np.array([[50.0]]), np.array([1.0]))
        f, _ = smooth.value_and_grad(np.array([1.0]))  # margin 50
        assert 0.0 < f < 1e-20

    def test_fd_random(self, rng):
        data = rng.standard_normal((6, 4))
        labels = rng.choice([-1.0, 1.0], size=6)
        smooth = logistic_loss(data, labels)
        for _ in range(3):
            assert_gradient_matches_fd(smooth, rng.standard_normal(4), rtol=1e-6)

    def test_intercept_variant(self, rng):
        data = rng.standard_normal((5, 3))
        labels = rng.choice([-1.0, 1.0], size=5)
        smooth = logistic_loss(data, labels, with_intercept=True)
        assert smooth.n == 4
        assert_gradient_matches_fd(smooth, rng.standard_normal(4), rtol=1e-6)

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            logistic_loss(np.ones((2, 2)), np.array([1.0, 2.0]))


class TestCuterProblems:
    def test_vardim_minimum(self):
        tp = cuter_problem("VARDIM", 50)
        f, _ = tp.smooth.value_and_grad(np.ones(50))
        assert f == 0.0

    def test_woods_minimum_and_start(self):
        tp = cuter_problem("WOODS", 8)
        f, _ = tp.smooth.value_and_grad(np.ones(8))
        assert f == 0.0
        np.testing.assert_array_equal(tp.x0, [-3.0, -1.0] * 4)

    def test_genrose_minimum(self):
        tp = cuter_problem("GENROSE", 10)
        f, _ = tp.smooth.value_and_grad(np.ones(10))
        assert f == 1.0

    def test_chainwoo_minimum(self):
        tp = cuter_problem("CHAINWOO", 10)
        f, _ = tp.smooth.value_and_grad(np.ones(10))
        assert f == 1.0

    def test_cosine_minimizer(self):
        # arguments of every cosine term equal pi: x_i = sqrt(pi + 0.5*x_{i+1})
        n = 40
        x = np.zeros(n)
        for i in range(n - 2, -1, -1):
            x[i] = np.sqrt(np.pi + 0.5 * x[i + 1])
        tp = cuter_problem("COSINE", n)
        f, _ = tp.smooth.value_and_grad(x)
        assert f == pytest.approx(-(n - 1), abs=1e-9)

    @pytest.mark.parametrize("name,bad_n", [("WOODS", 10), ("GENROSE", 1), ("CHAINWOO", 5), ("COSINE", 1)])
    def test_inadmissible_dimension(self, name, bad_n):
        with pytest.raises(ValueError):
            cuter_problem(name, bad_n)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            cuter_problem("FLETCHER", 100)

    @pytest.mark.parametrize("name", CUTER_NAMES)
    def test_gradients_match_fd(self, name, rng):
        tp = cuter_problem(name, FD_DIMS[name])
        assert_gradient_matches_fd(tp.smooth, tp.x0)
        for _ in range(10):
            x = tp.x0 + 0.5 * rng.standard_normal(tp.n)
            assert_gradient_matches_fd(tp.smooth, x)

    @pytest.mark.parametrize(
        "name,n,target,tol",
        [
            ("VARDIM", 100, 0.0, 1e-10),
            ("WOODS", 40, 0.0, 1e-8),
            ("GENROSE", 50, 1.0, 1e-6),
            ("COSINE", 100, -99.0, 1e-4),
        ],
    )
    def test_solver_reaches_documented_minimum(self, name, n, target, tol):
        tp = cuter_problem(name, n)
        problem = CompositeProblem(tp.smooth, RegularizerSpec(RegKind.L1, 0.0))
        result = run(problem, tp.x0, SolverConfig.preset("cuter"))
        assert abs(result.F - target) <= tol
