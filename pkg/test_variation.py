"""Tests for partition sums, p-variation, brackets and the index estimator."""

import itertools
import logging

import numpy as np
import pytest

from pathcalc.errors import DegeneratePath, InvalidArgument
from pathcalc.generators import KonoSpec, brownian_dyadic, kono_path, step_path
from pathcalc.paths import Partition, SampledPath, constant_path, make_dyadic_sequence
from pathcalc.variation import (
    cauchy_converged, gladyshev_index, level_s2, p_variation, quadratic_covariation,
    quadratic_variation, sigma_p, sp_sum, wiener_diagnostic,
)

KONO = KonoSpec(4, 0.5, (1, 1, 1, -1), 7)


def _path(values):
    return SampledPath(Partition(np.arange(float(len(values)))), np.asarray(values, dtype=float))


def test_sp_sum():
    f = _path([0.0, 1.0, -1.0, 2.0])
    assert sp_sum(f, f.grid, 2) == 14.0
    assert sp_sum(f, f.grid, 1) == 6.0
    with pytest.raises(InvalidArgument):
        sp_sum(f, f.grid, 0)


def test_p_variation_picks_the_coarse_partition():
    f = _path([0.0, 1.0, 0.5, 2.0])
    result = p_variation(f, 2.0)
    assert result.value == 4.0
    np.testing.assert_array_equal(result.points, [0.0, 3.0])
    assert p_variation(f, 1.0).value == 3.0


def test_p_variation_matches_enumeration():
    rng = np.random.Generator(np.random.Philox(11))
    for _ in range(20):
        values = rng.standard_normal(7)
        f = _path(values)
        for p in (1.0, 1.5, 2.0, 3.0):
            best = 0.0
            for r in range(6):
                for combo in itertools.combinations(range(1, 6), r):
                    idx = [0, *combo, 6]
                    best = max(best, float(np.sum(np.abs(np.diff(values[idx])) ** p)))
            assert p_variation(f, p).value == pytest.approx(best, rel=1e-12)


def test_p_variation_below_one_falls_back(caplog):
    f = _path([0.0, 1.0, 0.0])
    with caplog.at_level(logging.WARNING):
        result = p_variation(f, 0.5)
    assert result.fine_partition_fallback
    assert result.value == 2.0
    assert "p=0.5" in caplog.text


def test_p_variation_of_flat_path():
    assert p_variation(_path([1.0, 1.0, 1.0]), 2.0).value == 0.0


def test_sigma_p_of_step_path():
    lam = make_dyadic_sequence(1.0, 2, 3)
    f = step_path([(0.25, 0.5), (0.75, -0.3)], lam)
    assert sigma_p(f, 2.0) == pytest.approx(0.25 + 0.09)
    assert sigma_p(constant_path(lam.finest), 2.0) == 0.0


def test_cauchy_converged():
    assert cauchy_converged(np.array([1.0, 1.001, 1.0005]), rtol=1e-2)
    assert not cauchy_converged(np.array([1.0, 2.0, 3.0]), rtol=1e-2)
    assert not cauchy_converged(np.array([1.0, 1.0]), window=3)


def test_kono_bracket_is_time():
    w = kono_path(KONO)
    lam = make_dyadic_sequence(1.0, 4, 7)
    bracket = quadratic_variation(w, lam)
    times = lam.finest.points
    np.testing.assert_allclose(bracket.total, times, atol=1e-9)
    for m in range(1, 8):
        idx = lam.level_indices(m)
        np.testing.assert_allclose(bracket.per_level_s2[m - 1][idx], times[idx], atol=1e-9)
    assert bracket.converged
    np.testing.assert_allclose(bracket.jump_part, 0.0)


def test_kono_index_is_one_half():
    w = kono_path(KONO)
    estimate = gladyshev_index(w, make_dyadic_sequence(1.0, 4, 7))
    assert estimate.fitted == pytest.approx(0.5, abs=1e-9)
    for _, _, _, est in estimate.per_level:
        assert est == pytest.approx(0.5, abs=1e-9)


def test_step_path_bracket_is_jump_sum():
    lam = make_dyadic_sequence(1.0, 2, 4)
    f = step_path([(0.25, 0.5), (0.5, -0.3), (0.8125, 0.2)], lam)
    bracket = quadratic_variation(f, lam)
    assert bracket.final == pytest.approx(0.25 + 0.09 + 0.04)
    assert bracket.jump_part[-1] == pytest.approx(0.38)
    np.testing.assert_allclose(bracket.continuous_part, 0.0, atol=1e-12)


def test_brownian_bracket_near_one():
    B, _ = brownian_dyadic(1.0, 12, 1)
    bracket = quadratic_variation(B, make_dyadic_sequence(1.0, 2, 12))
    assert abs(bracket.final - 1.0) < 0.15
    assert bracket.level_finals().shape == (12,)


def test_polarization_per_level():
    lam = make_dyadic_sequence(1.0, 2, 8)
    B, _ = brownian_dyadic(1.0, 8, 2)
    W, _ = brownian_dyadic(1.0, 8, 3)
    cov = quadratic_covariation(B, W, lam)
    plus = quadratic_variation(B + W, lam)
    minus = quadratic_variation(B - W, lam)
    np.testing.assert_allclose(cov.per_level_c, 0.25 * (plus.per_level_s2 - minus.per_level_s2),
                               rtol=1e-10, atol=1e-12)


def test_covariation_with_itself_is_bracket():
    lam = make_dyadic_sequence(1.0, 2, 8)
    B, _ = brownian_dyadic(1.0, 8, 4)
    np.testing.assert_allclose(quadratic_covariation(B, B, lam).total,
                               quadratic_variation(B, lam).total)


def test_level_s2_of_linear_path():
    f = SampledPath(Partition([0.0, 1.0]), [0.0, 1.0])
    lam = make_dyadic_sequence(1.0, 2, 3)
    np.testing.assert_allclose(level_s2(f, lam), [0.5, 0.25, 0.125])


def test_index_errors():
    lam = make_dyadic_sequence(1.0, 2, 4)
    B, _ = brownian_dyadic(1.0, 4, 0)
    with pytest.raises(InvalidArgument):
        gladyshev_index(B, lam, window=1)
    with pytest.raises(InvalidArgument):
        gladyshev_index(B, lam, window=5)
    with pytest.raises(DegeneratePath):
        gladyshev_index(constant_path(lam.finest), lam)


def test_wiener_diagnostic():
    lam = make_dyadic_sequence(1.0, 2, 6)
    f = step_path([(0.25, 0.5), (0.5, -0.3), (0.8125, 0.2)], lam)
    report = wiener_diagnostic(f, lam)
    assert report.consistent
    assert report.sigma2 == pytest.approx(0.38)
    B, _ = brownian_dyadic(1.0, 6, 0)
    assert not wiener_diagnostic(B, lam).consistent
