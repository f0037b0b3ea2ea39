"""Tests for Cauchy sums, lambda-integrals, Young integrals and the chain rule."""

import numpy as np
import pytest

from pathcalc.errors import InvalidArgument
from pathcalc.generators import brownian_dyadic, step_path
from pathcalc.paths import CADLAG_STEP, Partition, SampledPath, constant_path, make_dyadic_sequence
from pathcalc.stieltjes import (
    EXP, LEFT, LOG, RIGHT, SQUARE, ScalarMap, chain_rule, chain_rule_residual_path,
    covariation_sum, improper_lc_tail, indefinite_integral, lambda_integral, lc_sum,
    ly_integral_bv, rc_sum, ry_integral_bv, weighted_quadratic_sum,
)
from pathcalc.variation import quadratic_variation


def test_cauchy_sums_on_three_points():
    grid = Partition([0.0, 0.5, 1.0])
    f = SampledPath(grid, [0.0, 0.5, 1.0])
    g = SampledPath(grid, [0.0, 0.25, 1.0])
    assert lc_sum(f, g, grid) == pytest.approx(0.375)
    assert rc_sum(f, g, grid) == pytest.approx(0.875)
    assert covariation_sum(f, g, grid) == pytest.approx(0.5)
    assert rc_sum(f, g, grid) - lc_sum(f, g, grid) == pytest.approx(covariation_sum(f, g, grid))


def test_constant_integrator_gives_zero():
    lam = make_dyadic_sequence(1.0, 2, 6)
    B, _ = brownian_dyadic(1.0, 6, 0)
    estimate = lambda_integral(B, constant_path(lam.finest, 2.0), lam)
    assert all(v == 0.0 for _, v in estimate.per_level)
    assert estimate.value == 0.0


def test_left_integral_of_path_against_itself():
    lam = make_dyadic_sequence(1.0, 2, 10)
    B, _ = brownian_dyadic(1.0, 10, 5)
    left = lambda_integral(B, B, lam, LEFT)
    right = lambda_integral(B, B, lam, RIGHT)
    s2 = quadratic_variation(B, lam).level_finals()
    end = B.values[-1] ** 2
    np.testing.assert_allclose(left.level_values(), 0.5 * (end - s2), rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(right.level_values(), 0.5 * (end + s2), rtol=1e-10, atol=1e-12)
    assert left.side == LEFT
    assert left.interval == (0.0, 1.0)


def test_integral_on_subinterval():
    lam = make_dyadic_sequence(1.0, 2, 8)
    t = SampledPath(lam.finest, lam.finest.points)
    estimate = lambda_integral(constant_path(lam.finest, 1.0), t, lam, LEFT, 0.25, 0.75)
    assert estimate.value == pytest.approx(0.5)
    with pytest.raises(InvalidArgument):
        lambda_integral(t, t, lam, "middle")


def test_jump_conditions_at_integrator_jumps():
    lam = make_dyadic_sequence(1.0, 2, 10)
    integrand = SampledPath(lam.finest, lam.finest.points)
    integrator = step_path([(0.5, 1.0)], lam)
    estimate = lambda_integral(integrand, integrator, lam, LEFT)
    assert len(estimate.jump_checks) == 1
    check = estimate.jump_checks[0]
    assert check.time == 0.5
    assert check.predicted_minus == pytest.approx(0.5)
    assert check.gap <= lam.mesh(10) + 1e-12


def test_indefinite_integral_is_a_path():
    lam = make_dyadic_sequence(1.0, 2, 6)
    t = SampledPath(lam.finest, lam.finest.points)
    path = indefinite_integral(constant_path(lam.finest, 2.0), t, lam)
    np.testing.assert_allclose(path.values, 2.0 * lam.finest.points)
    jumps = step_path([(0.5, 1.0)], lam)
    assert indefinite_integral(t, jumps, lam).style == CADLAG_STEP


def test_young_integral_against_continuous_bv():
    lam = make_dyadic_sequence(1.0, 2, 6)
    t = SampledPath(lam.finest, lam.finest.points)
    assert ly_integral_bv(constant_path(lam.finest, 1.0), t) == pytest.approx(1.0)
    assert ly_integral_bv(t, t) == pytest.approx(0.5, abs=1e-12)
    assert ly_integral_bv(t, t, 0.5) == pytest.approx(0.125, abs=1e-12)
    with pytest.raises(InvalidArgument):
        ly_integral_bv(t, t, 0.3)


def test_young_integrals_weight_jumps_by_side():
    lam = make_dyadic_sequence(1.0, 2, 4)
    V = step_path([(0.5, 1.0)], lam)
    psi = step_path([(0.5, 1.0)], lam)
    assert ly_integral_bv(psi, V) == pytest.approx(0.0)
    assert ry_integral_bv(psi, V) == pytest.approx(1.0)


def test_young_integral_against_bracket():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path([(0.25, 0.5), (0.75, -0.5)], lam)
    bracket = quadratic_variation(f, lam)
    assert ly_integral_bv(constant_path(lam.finest, 1.0), bracket) == pytest.approx(0.5)


def test_weighted_quadratic_sum():
    lam = make_dyadic_sequence(1.0, 2, 3)
    t = SampledPath(lam.finest, lam.finest.points)
    one = constant_path(lam.finest, 1.0)
    assert weighted_quadratic_sum(one, t, lam, 2) == pytest.approx(0.25)
    assert weighted_quadratic_sum(t, t, lam, 1, RIGHT) == pytest.approx(0.25 * 1.5)


def test_scalar_map_from_function():
    phi = ScalarMap.from_function(np.sin, "sin")
    x = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(phi.first(x), np.cos(x), atol=1e-8)
    np.testing.assert_allclose(phi.second(x), -np.sin(x), atol=1e-4)


def test_log_map_needs_positive_values():
    with pytest.raises(InvalidArgument):
        LOG.value(np.array([1.0, -1.0]))


@pytest.mark.parametrize("side", [LEFT, RIGHT])
def test_square_chain_rule_is_exact(side):
    lam = make_dyadic_sequence(1.0, 2, 10)
    B, _ = brownian_dyadic(1.0, 10, 8)
    report = chain_rule(SQUARE, B, lam, side=side)
    assert abs(report.residual) <= 1e-10
    assert report.lhs == pytest.approx(B.values[-1] ** 2 - B.values[0] ** 2)


def test_chain_rule_with_jumps_is_exact():
    lam = make_dyadic_sequence(1.0, 2, 6)
    f = step_path([(0.25, 0.5), (0.5, -0.3), (0.8125, 0.2)], lam, start=0.1)
    for side in (LEFT, RIGHT):
        report = chain_rule(EXP, f, lam, side=side)
        assert abs(report.residual) <= 1e-12
        assert report.bracket_term == pytest.approx(0.0, abs=1e-12)


def test_exp_chain_rule_residual_on_brownian_path():
    lam = make_dyadic_sequence(1.0, 2, 12)
    B, _ = brownian_dyadic(1.0, 12, 3)
    residual = chain_rule_residual_path(EXP, B, lam)
    assert residual.shape == lam.finest.points.shape
    assert np.max(np.abs(residual)) <= 0.02


def test_chain_rule_rejects_reversed_interval():
    lam = make_dyadic_sequence(1.0, 2, 4)
    B, _ = brownian_dyadic(1.0, 4, 0)
    with pytest.raises(InvalidArgument):
        chain_rule(SQUARE, B, lam, z=0.75, y=0.25)


def test_improper_tail_of_singular_integrand():
    depth = 12
    lam = make_dyadic_sequence(1.0, 2, depth)
    t = lam.finest.points
    values = np.append(1.0 / np.sqrt(1.0 - t[:-1]), 0.0)
    integrand = SampledPath(lam.finest, values)
    integrator = SampledPath(lam.finest, t)
    tail = improper_lc_tail(integrand, integrator, lam)
    assert abs(tail.value - 2.0) <= 3.0 * np.sqrt(2.0 ** -depth)
    assert tail.interval[1] == 1.0 - 2.0 ** -depth
    assert np.all(np.diff(tail.level_values()) > 0)


def test_log_derivatives_name_the_reciprocal():
    with pytest.raises(InvalidArgument, match="reciprocal"):
        LOG.first(np.array([1.0, 0.0]))
    with pytest.raises(InvalidArgument, match="reciprocal"):
        LOG.second(np.array([-2.0]))
    with pytest.raises(InvalidArgument, match="log"):
        LOG.value(np.array([0.0]))
