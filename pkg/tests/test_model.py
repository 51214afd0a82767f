import numpy as np
import pytest

from nbbl1 import (
    CompositeProblem,
    EvaluationError,
    RegKind,
    RegularizerSpec,
    SmoothObjective,
    SolverConfig,
    evaluate,
    regularizer_value,
)


def half_sq():
    return SmoothObjective(2, lambda x: (0.5 * float(x @ x), x.copy()))


class TestRegularizerValue:
    def test_l1(self):
        spec = RegularizerSpec(RegKind.L1, 0.25)
        assert regularizer_value(spec, np.array([1.0, -1.0, 2.0])) == 1.0

    def test_l2_triangle(self):
        spec = RegularizerSpec(RegKind.L2_NORM, 2.0)
        assert regularizer_value(spec, np.array([3.0, 4.0])) == 10.0

    def test_nuclear_diag(self):
        # singular values of diag(3, 1) from the 2x2 closed form:
        # sqrt of the eigenvalues of Y'Y = diag(9, 1)
        expected = np.sqrt(9.0) + np.sqrt(1.0)
        spec = RegularizerSpec(RegKind.NUCLEAR, 1.0, rows=2, cols=2)
        x = np.diag([3.0, 1.0]).ravel(order="F")
        assert regularizer_value(spec, x) == pytest.approx(expected, abs=1e-12)

    def test_nuclear_dimension_error(self):
        spec = RegularizerSpec(RegKind.NUCLEAR, 1.0, rows=2, cols=2)
        with pytest.raises(ValueError):
            regularizer_value(spec, np.ones(3))

    def test_nonnegative_and_zero_iff_zero(self, rng):
        specs = [
            RegularizerSpec(RegKind.L1, 0.7),
            RegularizerSpec(RegKind.L2_NORM, 0.3),
            RegularizerSpec(RegKind.NUCLEAR, 1.2, rows=2, cols=3),
        ]
        for spec in specs:
            assert regularizer_value(spec, np.zeros(6)) == 0.0
            for _ in range(25):
                x = rng.standard_normal(6)
                value = regularizer_value(spec, x)
                assert value >= 0.0
                assert value > 0.0  # x != 0 almost surely

    def test_sign_flip_invariance(self, rng):
        for kind in (RegKind.L1, RegKind.L2_NORM):
            spec = RegularizerSpec(kind, 0.9)
            for _ in range(20):
                x = rng.standard_normal(5)
                flip = rng.choice([-1.0, 1.0], size=5)
                assert regularizer_value(spec, x) == pytest.approx(
                    regularizer_value(spec, flip * x), rel=1e-15
                )

    def test_l2_rotation_invariance(self, rng):
        spec = RegularizerSpec(RegKind.L2_NORM, 1.0)
        for _ in range(20):
            x = rng.standard_normal(2)
            theta = rng.uniform(0, 2 * np.pi)
            c, s = np.cos(theta), np.sin(theta)
            rot = np.array([[c, -s], [s, c]]) @ x
            assert regularizer_value(spec, rot) == pytest.approx(
                regularizer_value(spec, x), rel=1e-12
            )


class TestEvaluate:
    def test_zero_case(self):
        problem = CompositeProblem(half_sq(), RegularizerSpec(RegKind.L1, 0.0))
        f, g, F = evaluate(problem, np.zeros(2))
        assert f == 0.0 and F == 0.0
        assert np.array_equal(g, np.zeros(2))

    def test_l1_hand_check(self):
        problem = CompositeProblem(half_sq(), RegularizerSpec(RegKind.L1, 1.0))
        x = np.array([3.0, -4.0])
        f, g, F = evaluate(problem, x)
        assert f == 12.5
        assert np.array_equal(g, x)
        assert F == 12.5 + (abs(3.0) + abs(-4.0))

    def test_nuclear_1x1_is_abs(self):
        smooth = SmoothObjective(1, lambda x: (float(x[0] ** 2), 2.0 * x))
        problem = CompositeProblem(
            smooth, RegularizerSpec(RegKind.NUCLEAR, 2.0, rows=1, cols=1)
        )
        f, _, F = evaluate(problem, np.array([-3.0]))
        assert F == f + 2.0 * 3.0

    def test_f_plus_regularizer_exact(self, rng):
        spec = RegularizerSpec(RegKind.L1, 0.37)
        problem = CompositeProblem(half_sq(), spec)
        for _ in range(20):
            x = rng.standard_normal(2)
            f, _, F = evaluate(problem, x)
            assert F == f + regularizer_value(spec, x)

    def test_deterministic_evaluator(self, rng):
        problem = CompositeProblem(half_sq(), RegularizerSpec(RegKind.L1, 1.0))
        x = rng.standard_normal(2)
        assert evaluate(problem, x)[0] == evaluate(problem, x)[0]
        assert np.array_equal(evaluate(problem, x)[1], evaluate(problem, x)[1])

    def test_nonfinite_value_raises(self):
        smooth = SmoothObjective(1, lambda x: (float("inf"), x))
        problem = CompositeProblem(smooth, RegularizerSpec(RegKind.L1, 0.0))
        with pytest.raises(EvaluationError):
            evaluate(problem, np.ones(1))

    def test_nonfinite_gradient_names_index(self):
        def vg(x):
            g = x.copy()
            g[2] = np.nan
            return 0.0, g

        problem = CompositeProblem(SmoothObjective(4, vg), RegularizerSpec(RegKind.L1, 0.0))
        with pytest.raises(EvaluationError, match="component 2"):
            evaluate(problem, np.ones(4))

    def test_dimension_mismatch(self):
        problem = CompositeProblem(half_sq(), RegularizerSpec(RegKind.L1, 0.0))
        with pytest.raises(ValueError):
            evaluate(problem, np.ones(3))


class TestSpecsAndConfig:
    def test_negative_mu_rejected(self):
        with pytest.raises(ValueError):
            RegularizerSpec(RegKind.L1, -0.1)

    def test_nuclear_needs_shape(self):
        with pytest.raises(ValueError):
            RegularizerSpec(RegKind.NUCLEAR, 1.0)

    def test_nuclear_shape_must_match_problem(self):
        with pytest.raises(ValueError):
            CompositeProblem(half_sq(), RegularizerSpec(RegKind.NUCLEAR, 1.0, rows=3, cols=3))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"h": 0.0},
            {"h": 1.5},
            {"rho": 1.0},
            {"delta": 0.0},
            {"m_tilde": -1},
            {"lambda_min": 0.0},
            {"lambda_min": 2.0, "lambda_max": 1.0},
            {"tol_d": -1e-9},
            {"max_iter": 0},
            {"max_backtracks": 0},
            {"lambda0": 0.0},
        ],
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_presets(self):
        cuter = SolverConfig.preset("cuter")
        assert (cuter.tol_d, cuter.tol_x, cuter.h) == (1e-8, 0.0, 1.0)
        assert (cuter.lambda_min, cuter.lambda_max) == (1e-20, 1e20)
        assert (cuter.rho, cuter.delta, cuter.m_tilde) == (0.35, 1e-4, 5)
        cs = SolverConfig.preset("cs")
        assert (cs.tol_d, cs.tol_x, cs.h) == (0.0, 1e-4, 1e-2)
        assert (cs.lambda_min, cs.lambda_max) == (1e-30, 1e30)
        dct = SolverConfig.preset("cs-dct")
        assert (dct.h, dct.delta) == (0.8, 1e-5)
        assert (dct.tol_d, dct.tol_x) == (0.0, 1e-4)
        with pytest.raises(ValueError):
            SolverConfig.preset("nope")
