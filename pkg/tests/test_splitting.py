import numpy as np
import pytest
import scipy.linalg
from scipy.stats import linregress

from splitstep.errors import DimensionError, GridIncompatibleError, MissingFreezePolicyError, StudyConfigError
from splitstep.linalg import as_matrix, as_vector, expm_table
from splitstep.problems import SplitProblem, dahlquist_2x2
from splitstep.splitting import (
    IterateGrid,
    QuadRule,
    SweepSide,
    cumulative_integral,
    intervals_per_step,
    iterative_split_solve,
    iterative_split_trajectory,
    span_weights,
    split_step,
    sweep,
)


@pytest.fixture
def relaxation():
    return dahlquist_2x2(0.25, 0.5)


def solve_error(problem, partitions, iterations, rule, h=1e-3):
    approx = iterative_split_solve(problem, partitions, iterations, rule, h)
    return float(np.max(np.abs(approx - problem.exact(problem.t_end))))


class TestQuadRule:
    """Test cases for the QuadRule enum."""

    @pytest.mark.parametrize("rule", list(QuadRule))
    def test_weights_sum_to_one(self, rule):
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert len(rule.weights) == rule.panel + 1

    def test_simpson_and_bode_weights(self):
        np.testing.assert_allclose(QuadRule.SIMPSON.weights, [1 / 6, 4 / 6, 1 / 6])
        np.testing.assert_allclose(QuadRule.BODE.weights, np.array([7, 32, 12, 32, 7]) / 90)

    def test_labels_and_orders(self):
        assert [r.label for r in QuadRule] == ["Trapezoid", "BDF3/Simpson", "Bode"]
        assert [r.nominal_order for r in QuadRule] == [2, 3, 4]

    def test_invalid_value(self):
        with pytest.raises(ValueError):
            QuadRule("midpoint")


class TestIntervalsPerStep:
    """Test cases for intervals_per_step."""

    def test_exact_division(self):
        assert intervals_per_step(1.0, 1e-3, QuadRule.BODE) == 1000
        assert intervals_per_step(0.01, 1e-3, QuadRule.BODE) == 10

    def test_spacing_must_divide_step(self):
        with pytest.raises(GridIncompatibleError):
            intervals_per_step(1.0, 3e-3, QuadRule.TRAPEZOID)

    def test_too_coarse_for_rule(self):
        with pytest.raises(GridIncompatibleError):
            intervals_per_step(0.002, 1e-3, QuadRule.BODE)
        assert intervals_per_step(0.002, 1e-3, QuadRule.SIMPSON) == 2

    def test_non_positive(self):
        with pytest.raises(GridIncompatibleError):
            intervals_per_step(1.0, 0.0, QuadRule.TRAPEZOID)


class TestSweepSide:
    """Test cases for SweepSide.for_iteration."""

    def test_alternation(self):
        assert [SweepSide.for_iteration(i) for i in range(1, 5)] == [
            SweepSide.ODD, SweepSide.EVEN, SweepSide.ODD, SweepSide.EVEN,
        ]


class TestCumulativeIntegral:
    """Test cases for cumulative_integral with a trivial propagator."""

    def _integrate(self, rule, count, power):
        h = 0.1
        table = expm_table(np.zeros((1, 1)), h, count)
        s = h * np.arange(count + 1)
        return s, cumulative_integral(table, (s**power)[:, None], h, rule)[:, 0]

    @pytest.mark.parametrize("rule", list(QuadRule))
    def test_linear_forcing_exact_at_every_node(self, rule):
        """Every rule and every partial panel integrates a line exactly."""
        s, integral = self._integrate(rule, 10, 1)
        np.testing.assert_allclose(integral, s**2 / 2, atol=1e-14)

    @pytest.mark.parametrize("rule", [QuadRule.SIMPSON, QuadRule.BODE])
    def test_cubic_forcing_exact_on_panel_boundaries(self, rule):
        s, integral = self._integrate(rule, 12, 3)
        anchors = np.arange(0, 13, rule.panel)
        np.testing.assert_allclose(integral[anchors], s[anchors] ** 4 / 4, atol=1e-14)

    def test_bode_quintic_exact(self):
        s, integral = self._integrate(QuadRule.BODE, 8, 5)
        np.testing.assert_allclose(integral[[0, 4, 8]], s[[0, 4, 8]] ** 6 / 6, atol=1e-14)

    @pytest.mark.parametrize("rule,count,power", [
        (QuadRule.SIMPSON, 11, 2),
        (QuadRule.BODE, 10, 4),
        (QuadRule.BODE, 12, 4),
    ])
    def test_partial_panels_keep_the_panel_degree(self, rule, count, power):
        """Nodes inside a panel, and past the last whole panel, integrate degree-w forcing exactly."""
        s, integral = self._integrate(rule, count, power)
        np.testing.assert_allclose(integral, s ** (power + 1) / (power + 1), atol=1e-13)

    def test_partial_panels_with_a_propagator(self):
        """Interior Bode nodes match exp(p (s_m - s)) g(s) integrated in closed form."""
        h, count, p = 0.01, 10, -0.7
        s = h * np.arange(count + 1)
        table = expm_table(np.array([[p]]), h, count)
        integral = cumulative_integral(table, np.ones((count + 1, 1)), h, QuadRule.BODE)[:, 0]
        np.testing.assert_allclose(integral, np.expm1(p * s) / p, atol=1e-12)

    def test_span_weights_reproduce_newton_cotes(self):
        np.testing.assert_allclose(span_weights(4, 0, 4), np.array([14, 64, 24, 64, 14]) / 45, atol=1e-14)
        np.testing.assert_allclose(span_weights(2, 0, 1), [5 / 12, 8 / 12, -1 / 12], atol=1e-15)


class TestSweep:
    """Test cases for a single sweep."""

    def test_first_sweep_is_pure_propagation(self, relaxation):
        """From c_0 = 0 the ODD sweep gives exp(A s) c."""
        c_n = as_vector([1.0, 1.0])
        grid = sweep(relaxation.operator_a, relaxation.operator_b,
                     IterateGrid.zeros(0.0, 1.0, 0.01, 2), c_n, SweepSide.ODD, QuadRule.TRAPEZOID)
        for m in (0, 1, 37, 100):
            expected = scipy.linalg.expm(relaxation.operator_a * grid.nodes[m]) @ c_n
            np.testing.assert_allclose(grid.values[m], expected, atol=1e-14)

    def test_zero_operators_give_constant_grid(self):
        zero = as_matrix(np.zeros((2, 2)))
        c_n = as_vector([0.3, -1.2])
        grid = sweep(zero, zero, IterateGrid.zeros(0.0, 0.5, 0.05, 2), c_n, SweepSide.EVEN, QuadRule.SIMPSON)
        np.testing.assert_array_equal(grid.values, np.tile(c_n, (11, 1)))

    @pytest.mark.parametrize("rule", list(QuadRule))
    def test_start_value_is_bit_exact(self, relaxation, rule):
        c_n = as_vector([0.1 + 0.2, 1.0 / 3.0])
        grid = IterateGrid.zeros(0.0, 0.1, 1e-3, 2)
        for i in (1, 2, 3):
            grid = sweep(relaxation.operator_a, relaxation.operator_b, grid, c_n, SweepSide.for_iteration(i), rule)
            assert np.array_equal(grid.values[0], c_n)

    def test_output_is_read_only(self, relaxation):
        grid = sweep(relaxation.operator_a, relaxation.operator_b, IterateGrid.zeros(0.0, 0.1, 0.01, 2),
                     relaxation.u0, SweepSide.ODD, QuadRule.TRAPEZOID)
        with pytest.raises(ValueError):
            grid.values[1, 0] = 0.0

    def test_dimension_mismatch(self, relaxation):
        with pytest.raises(DimensionError):
            sweep(relaxation.operator_a, relaxation.operator_b, IterateGrid.zeros(0.0, 0.1, 0.01, 3),
                  as_vector([1.0, 1.0, 1.0]), SweepSide.ODD, QuadRule.TRAPEZOID)

    def test_grid_too_coarse(self, relaxation):
        with pytest.raises(GridIncompatibleError):
            sweep(relaxation.operator_a, relaxation.operator_b, IterateGrid.zeros(0.0, 0.002, 1e-3, 2),
                  relaxation.u0, SweepSide.ODD, QuadRule.BODE)

    def test_conservation(self, relaxation):
        """Zero column sums keep the component sum of every node."""
        grid = IterateGrid.zeros(0.0, 1.0, 1e-3, 2)
        for i in range(1, 5):
            grid = sweep(relaxation.operator_a, relaxation.operator_b, grid, relaxation.u0,
                         SweepSide.for_iteration(i), QuadRule.BODE)
            np.testing.assert_allclose(grid.values.sum(axis=1), 2.0, rtol=1e-12)


class TestIterativeSplitSolve:
    """Test cases for iterative_split_solve on the relaxation problem."""

    def test_two_sweeps_one_step(self, relaxation):
        error = solve_error(relaxation, 1, 2, QuadRule.TRAPEZOID)
        assert 4.5321e-2 / 2 < error < 4.5321e-2 * 2

    def test_three_sweeps_ten_steps(self, relaxation):
        error = solve_error(relaxation, 10, 3, QuadRule.TRAPEZOID)
        assert 6.6383e-5 / 2 < error < 6.6383e-5 * 2

    def test_bode_six_sweeps_hundred_steps(self, relaxation):
        assert solve_error(relaxation, 100, 6, QuadRule.BODE) <= 1e-13

    def test_single_sweep_is_exp_a(self, relaxation):
        approx = iterative_split_solve(relaxation, 1, 1, QuadRule.TRAPEZOID, 1e-3)
        np.testing.assert_allclose(approx, scipy.linalg.expm(relaxation.operator_a) @ relaxation.u0, atol=1e-14)

    @pytest.mark.parametrize("rule", list(QuadRule))
    @pytest.mark.parametrize("partitions,iterations", [(1, 2), (10, 3), (100, 5)])
    def test_conservation(self, relaxation, rule, partitions, iterations):
        approx = iterative_split_solve(relaxation, partitions, iterations, rule, 1e-3)
        assert abs(approx.sum() - 2.0) <= 2.0 * 1e-12

    def test_invalid_counts(self, relaxation):
        with pytest.raises(StudyConfigError):
            iterative_split_solve(relaxation, 0, 2, QuadRule.TRAPEZOID, 1e-3)
        with pytest.raises(StudyConfigError):
            iterative_split_solve(relaxation, 1, 0, QuadRule.TRAPEZOID, 1e-3)

    def test_incompatible_spacing(self, relaxation):
        with pytest.raises(GridIncompatibleError):
            iterative_split_solve(relaxation, 1, 2, QuadRule.TRAPEZOID, 3e-3)

    def test_bode_with_partial_panels(self, relaxation):
        """Ten intervals per step are not a multiple of four and still converge."""
        assert solve_error(relaxation, 100, 4, QuadRule.BODE) < 1e-8

    def test_missing_freeze_policy(self):
        problem = SplitProblem(
            name="drifting",
            operator_a=lambda t: as_matrix([[-t, 0.0], [0.0, 0.0]]),
            operator_b=as_matrix(np.zeros((2, 2))),
            u0=as_vector([1.0, 0.0]),
            t0=0.0,
            t_end=1.0,
        )
        with pytest.raises(MissingFreezePolicyError):
            iterative_split_solve(problem, 10, 2, QuadRule.TRAPEZOID, 1e-2)


class TestTrajectory:
    """Test cases for iterative_split_trajectory."""

    def test_shapes_and_endpoints(self, relaxation):
        times, states = iterative_split_trajectory(relaxation, 10, 3, QuadRule.SIMPSON, 1e-3)
        assert times.shape == (11,)
        assert states.shape == (11, 2)
        assert times[0] == 0.0 and times[-1] == 1.0
        np.testing.assert_array_equal(states[0], relaxation.u0)
        np.testing.assert_array_equal(states[-1], iterative_split_solve(relaxation, 10, 3, QuadRule.SIMPSON, 1e-3))


class TestLocalConsistency:
    """One-step error of the i-th iterate shrinks like tau**i."""

    @pytest.mark.parametrize("iterations", [1, 2, 3])
    def test_one_step_slope(self, relaxation, iterations):
        taus = [0.1, 0.05, 0.025]
        generator = relaxation.operator_a + relaxation.operator_b
        errors = []
        for tau in taus:
            approx = split_step(relaxation.operator_a, relaxation.operator_b, relaxation.u0, 0.0, tau,
                                iterations, QuadRule.TRAPEZOID, 1e-3)
            exact = scipy.linalg.expm(generator * tau) @ relaxation.u0
            errors.append(np.max(np.abs(approx - exact)))
        slope = linregress(np.log(taus), np.log(errors)).slope
        assert slope >= iterations - 0.3
