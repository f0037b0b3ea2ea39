"""Tests for product integrals, Doleans exponentials and the evolution generator."""

import numpy as np
import pytest

from pathcalc.errors import DegenerateProduct, InvalidArgument, NotAnEvolution
from pathcalc.generators import brownian_dyadic, step_path
from pathcalc.paths import Partition, SampledPath, make_dyadic_sequence
from pathcalc.product import (
    BACKWARD, FORWARD, doleans, doleans_bracket_gap, duality_roundtrip, jump_product,
    lambda_generator, linear_equation_residual, partition_product, product_lambda_integral,
)

JUMPS = [(0.25, 0.5), (0.5, -0.3), (0.8125, 0.2)]


def test_partition_product():
    f = SampledPath(Partition([0.0, 0.5, 1.0]), [0.0, 0.5, 0.2])
    assert partition_product(f, f.grid) == pytest.approx(1.5 * 0.7)


def test_product_integral_of_linear_path_tends_to_exp():
    lam = make_dyadic_sequence(1.0, 2, 12)
    g = SampledPath(lam.finest, lam.finest.points)
    estimate = product_lambda_integral(g, lam)
    assert estimate.value == pytest.approx(np.e, rel=1e-3)
    assert estimate.converged
    assert estimate.per_level[0] == (1, pytest.approx(2.25))


def test_product_integral_is_multiplicative_over_adjacent_intervals():
    lam = make_dyadic_sequence(1.0, 2, 6)
    B, _ = brownian_dyadic(1.0, 6, 2)
    f = B * 0.3
    whole = product_lambda_integral(f, lam, 0.0, 1.0).per_level
    for u, first_level in ((0.5, 1), (0.25, 2), (0.75, 2)):
        left = product_lambda_integral(f, lam, 0.0, u).per_level
        right = product_lambda_integral(f, lam, u, 1.0).per_level
        for (m, a), (_, b), (_, c) in zip(whole, left, right):
            if m >= first_level:
                assert a == pytest.approx(b * c, rel=1e-12)



def test_product_integral_rejects_minus_one_jump():
    lam = make_dyadic_sequence(1.0, 2, 3)
    f = step_path([(0.5, -1.0)], lam)
    with pytest.raises(DegenerateProduct):
        product_lambda_integral(f, lam)


def test_jump_product():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path([(0.25, 0.5)], lam)
    assert jump_product(f) == pytest.approx(1.5 * np.exp(-0.5))
    assert jump_product(f, 0.5, 1.0) == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        jump_product(f, 0.75, 0.25)


def test_forward_doleans_of_pure_jump_path():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path(JUMPS, lam)
    E = doleans(f, lam, FORWARD)
    np.testing.assert_allclose(E.values, np.cumprod(1.0 + f.delta_minus), atol=1e-12)
    assert E.path.style == f.style


def test_backward_doleans_of_pure_jump_path():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path(JUMPS, lam)
    E = doleans(f, lam, BACKWARD)
    factors = 1.0 + f.delta_minus
    expected = np.array([np.prod(factors[i + 1:]) for i in range(factors.size)])
    np.testing.assert_allclose(E.values, expected, atol=1e-12)
    assert E.values[-1] == pytest.approx(1.0)


def test_doleans_rejects_unknown_direction():
    lam = make_dyadic_sequence(1.0, 2, 3)
    with pytest.raises(InvalidArgument):
        doleans(step_path(JUMPS[:1], lam), lam, "sideways")


def test_forward_doleans_of_brownian_path():
    lam = make_dyadic_sequence(1.0, 2, 12)
    B, _ = brownian_dyadic(1.0, 12, 9)
    E = doleans(B, lam, FORWARD)
    assert E.values[0] == 1.0
    assert np.all(E.values > 0)
    assert linear_equation_residual(B, lam).sup <= 0.02


def test_pure_jump_linear_equation_is_exact():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path(JUMPS, lam)
    assert linear_equation_residual(f, lam).sup <= 1e-12


def test_duality_roundtrips():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path(JUMPS, lam)
    report = duality_roundtrip(f, lam)
    assert report.generator_gap <= 1e-12
    assert report.ratio_gap <= 1e-12

    lam = make_dyadic_sequence(1.0, 2, 12)
    B, _ = brownian_dyadic(1.0, 12, 10)
    assert duality_roundtrip(B, lam).generator_gap <= 0.05


def test_generator_needs_an_evolution():
    lam = make_dyadic_sequence(1.0, 2, 3)
    t = lam.finest.points
    with pytest.raises(NotAnEvolution):
        lambda_generator(SampledPath(lam.finest, 2.0 + t), lam)
    with pytest.raises(NotAnEvolution):
        lambda_generator(SampledPath(lam.finest, 1.0 - t), lam)


def test_generator_of_exponential_is_linear():
    lam = make_dyadic_sequence(1.0, 2, 12)
    t = lam.finest.points
    L = lambda_generator(SampledPath(lam.finest, np.exp(t)), lam)
    np.testing.assert_allclose(L.values, t, atol=1e-3)
    assert len(L.evolution_sums) == 12
    assert L.path.is_continuous


def test_doleans_bracket_law():
    lam = make_dyadic_sequence(1.0, 2, 12)
    B, _ = brownian_dyadic(1.0, 12, 12)
    gap, lhs, rhs = doleans_bracket_gap(B, lam)
    assert gap <= 0.05 * rhs
    assert lhs > 0
