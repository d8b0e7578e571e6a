"""Fixed-point, monotone, Newton, and nested solution strategies."""

import numpy as np
import pytest

from tsdyn import (
    BracketViolation,
    DirichletProblem,
    GridFunction,
    Nonlinearity,
    RhsMode,
    SolveConfig,
    Status,
    Strategy,
    TooFewPoints,
    apply_green_operator,
    clamp_to_band,
    construct_bounds,
    envelope_weight,
    regularized_rhs,
    residual_norm,
    solve,
    uniform,
)


def power_problem(ts, gamma=0.5):
    f = Nonlinearity.from_expression(
        f"x1^(-{gamma})", arity=1, degree_low=(-gamma,), degree_high=(gamma,)
    )
    return DirichletProblem(ts, (f,))


def isotone_problem(ts):
    f = Nonlinearity.from_expression(
        "1 + x1^0.5", arity=1, degree_low=(-0.1,), degree_high=(0.5,)
    )
    return DirichletProblem(ts, (f,))


@pytest.fixture
def singular65(unit65):
    return power_problem(unit65)


class TestLinearRegression:
    def test_constant_forcing_has_parabolic_solution(self, unit65):
        f = Nonlinearity.from_expression("1", arity=1)
        report = solve(DirichletProblem(unit65, (f,)))
        assert report.converged
        t = unit65.points
        assert np.allclose(
            report.solution.component(1), t * (1.0 - t) / 2.0, rtol=0, atol=1e-12
        )
        assert report.solution.value_at(32)[0] == pytest.approx(0.125, abs=1e-13)

    def test_nonzero_boundaries(self, unit65):
        f = Nonlinearity.from_expression("0", arity=1)
        p = DirichletProblem(
            unit65, (f,), boundary_left=(2.0,), boundary_right=(-1.0,)
        )
        report = solve(p)
        assert report.converged
        t = unit65.points
        assert np.allclose(report.solution.component(1), 2.0 - 3.0 * t, atol=1e-12)


class TestPicard:
    def test_singular_problem_with_constructed_bounds(self, singular65):
        pair = construct_bounds(singular65)
        report = solve(singular65, brackets=pair.pair)
        assert report.status is Status.CONVERGED
        assert report.final_residual <= 1e-10
        assert report.bracket_respected
        assert report.strategy is Strategy.PICARD

    def test_unbracketed_singular_start_from_interpolant_diverges(self, singular65):
        # zero boundary data starts the iteration on the domain edge
        report = solve(singular65)
        assert report.status is Status.DIVERGED
        assert report.notes

    def test_divergence_cutoff(self, unit65):
        # forcing this strong admits no solution; iterates must blow up
        f = Nonlinearity.from_expression("100*(1 + x1^2)", arity=1, degree_high=(2.0,))
        report = solve(
            DirichletProblem(unit65, (f,)),
            config=SolveConfig(max_iters=2000),
        )
        assert report.status is Status.DIVERGED
        assert report.iterations < 2000

    def test_max_iters_reported(self, singular65):
        pair = construct_bounds(singular65)
        report = solve(singular65, brackets=pair.pair, config=SolveConfig(max_iters=3))
        assert report.status is Status.MAX_ITERS
        assert report.iterations == 3


class TestNewton:
    def test_agrees_with_picard(self, singular65):
        pair = construct_bounds(singular65)
        picard = solve(singular65, brackets=pair.pair)
        newton = solve(singular65, strategy=Strategy.NEWTON_ORACLE, brackets=pair.pair)
        assert newton.converged
        gap = np.max(np.abs(picard.solution.values - newton.solution.values))
        assert gap <= 1e-8

    def test_quadratic_tail(self, singular65):
        pair = construct_bounds(singular65)
        newton = solve(singular65, strategy=Strategy.NEWTON_ORACLE, brackets=pair.pair)
        assert newton.iterations < 15
        assert newton.final_residual < 1e-10


class TestMonotone:
    def test_requires_brackets(self, unit65):
        with pytest.raises(BracketViolation):
            solve(isotone_problem(unit65), strategy=Strategy.MONOTONE_UP)

    @pytest.mark.parametrize(
        "strategy", [Strategy.MONOTONE_UP, Strategy.MONOTONE_DOWN]
    )
    def test_isotone_map_converges_from_either_end(self, strategy):
        ts = uniform(0.0, 1.0, 33)
        p = isotone_problem(ts)
        pair = construct_bounds(p)
        report = solve(p, strategy=strategy, brackets=pair.pair)
        assert report.converged
        assert report.final_residual <= 1e-10

    def test_directions_meet(self):
        ts = uniform(0.0, 1.0, 33)
        p = isotone_problem(ts)
        pair = construct_bounds(p)
        up = solve(p, strategy=Strategy.MONOTONE_UP, brackets=pair.pair)
        down = solve(p, strategy=Strategy.MONOTONE_DOWN, brackets=pair.pair)
        gap = np.max(np.abs(up.solution.values - down.solution.values))
        assert gap < 1e-8

    def test_antitone_map_breaks_ordering(self, singular65):
        # decreasing f makes the operator order-reversing, which the
        # direction check must flag rather than silently accept
        pair = construct_bounds(singular65)
        report = solve(singular65, strategy=Strategy.MONOTONE_UP, brackets=pair.pair)
        assert report.status is Status.DIVERGED
        assert any("monotonicity violated" in n for n in report.notes)


class TestNested:
    def test_converges_on_truncations(self):
        ts = uniform(0.0, 1.0, 33)
        p = isotone_problem(ts)
        pair = construct_bounds(p)
        report = solve(p, strategy=Strategy.TRUNCATED_NEST, brackets=pair.pair)
        assert report.converged
        assert report.nest_trail is not None
        assert len(report.nest_trail) >= 2
        assert report.solution.support == (0, ts.last_index)

    def test_needs_room_to_truncate(self, unit5):
        p = isotone_problem(unit5)
        pair = construct_bounds(p)
        with pytest.raises(TooFewPoints):
            solve(p, strategy=Strategy.TRUNCATED_NEST, brackets=pair.pair)

    def test_trail_contracts(self, singular65):
        pair = construct_bounds(singular65)
        report = solve(singular65, strategy=Strategy.TRUNCATED_NEST, brackets=pair.pair)
        assert report.converged
        # successive truncations stay inside the band and settle down
        assert report.nest_trail[-1] < 1.0


class TestRhsModes:
    def test_truncated_stays_in_band(self, singular65):
        pair = construct_bounds(singular65)
        alpha, beta = pair.pair
        ts = singular65.scale
        wild = GridFunction.from_values(
            ts, np.linspace(-5.0, 5.0, ts.npoints)
        )
        rhs = regularized_rhs(singular65, wild, pair.pair, RhsMode.TRUNCATED)
        direct = regularized_rhs(singular65, clamp_to_band(wild, alpha, beta))
        assert np.allclose(rhs.values, direct.values, rtol=0, atol=1e-15)

    def test_modified_mode_needs_brackets(self, singular65):
        u = envelope_weight(singular65.scale) + 0.1
        with pytest.raises(BracketViolation):
            regularized_rhs(singular65, u, None, RhsMode.MODIFIED)

    def test_modified_correction_is_bounded(self, singular65):
        pair = construct_bounds(singular65)
        u = envelope_weight(singular65.scale) * 40.0 + 0.01
        raw_at_clamp = regularized_rhs(
            singular65, clamp_to_band(u, *pair.pair), pair.pair, RhsMode.TRUNCATED
        )
        modified = regularized_rhs(singular65, u, pair.pair, RhsMode.MODIFIED)
        assert np.max(np.abs(modified.values - raw_at_clamp.values)) <= 1.0 + 1e-12

    def test_clamp_to_band(self, unit65):
        alpha = GridFunction.constant(unit65, 0.0)
        beta = GridFunction.constant(unit65, 1.0)
        u = GridFunction.from_values(unit65, np.linspace(-1.0, 2.0, 65))
        clamped = clamp_to_band(u, alpha, beta)
        assert clamped.values.min() == 0.0
        assert clamped.values.max() == 1.0


class TestResidual:
    def test_exact_solution_scores_zero(self, unit65):
        f = Nonlinearity.from_expression("1", arity=1)
        p = DirichletProblem(unit65, (f,))
        t = unit65.points
        exact = GridFunction.from_values(unit65, t * (1.0 - t) / 2.0)
        assert residual_norm(p, exact) < 1e-12

    def test_domain_escape_scores_infinity(self, singular65):
        zero = GridFunction.constant(singular65.scale, 0.0)
        assert residual_norm(singular65, zero) == np.inf

    def test_operator_fixed_point_is_solution(self, singular65):
        pair = construct_bounds(singular65)
        report = solve(singular65, brackets=pair.pair)
        u = report.solution
        image = apply_green_operator(singular65, u, pair.pair, RhsMode.TRUNCATED)
        assert np.max(np.abs(image.values - u.values)) < 1e-8
