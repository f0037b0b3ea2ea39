"""Tests for the seeded and deterministic path generators."""

import numpy as np
import pytest
from scipy.stats import ks_2samp

from pathcalc.config import FBM_MAX_N
from pathcalc.errors import AccessibilityViolation, InvalidArgument, InvalidSpec
from pathcalc.generators import (
    FourierPairSpec, KonoSpec, Seeded, brownian_dyadic, fbm_cholesky, first_passage_skeleton,
    fourier_exact_mean, fourier_pair_paths, fourier_pair_sums, fourier_pair_sums_direct,
    kono_path, nonexistence_growth, step_path,
)
from pathcalc.paths import CADLAG_STEP, Partition, SampledPath, make_dyadic_sequence
from pathcalc.stieltjes import lc_sum, rc_sum


def test_seed_must_be_unsigned():
    with pytest.raises(InvalidArgument):
        Seeded(-1)
    with pytest.raises(InvalidArgument):
        Seeded(3, algorithm="mt19937")


def test_brownian_is_deterministic():
    a, _ = brownian_dyadic(1.0, 8, 5)
    b, _ = brownian_dyadic(1.0, 8, 5)
    c, _ = brownian_dyadic(1.0, 8, 6)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert a.values[0] == 0.0
    assert a.grid.points.size == 257


def test_brownian_tower_does_not_depend_on_depth():
    _, shallow = brownian_dyadic(1.0, 6, 3)
    path, deep = brownian_dyadic(1.0, 8, 3)
    for coarse, fine in zip(shallow, deep):
        np.testing.assert_array_equal(coarse, fine)
    for coarse, fine in zip(deep, deep[1:]):
        np.testing.assert_array_equal(fine[::2], coarse)
    np.testing.assert_array_equal(path.values, deep[-1])


def test_brownian_endpoint_is_standard_normal():
    ends = np.array([brownian_dyadic(1.0, 1, seed)[0].values[-1] for seed in range(1000)])
    assert abs(ends.mean()) <= 3.0 / np.sqrt(1000)
    assert abs(ends.var(ddof=1) - 1.0) <= 3.0 * np.sqrt(2.0 / 999)


def test_generator_streams_are_independent_of_the_path_stream():
    base = Seeded(9).generator().standard_normal(4)
    again = Seeded(9).generator(stream=0).standard_normal(4)
    side = Seeded(9).generator(stream=1).standard_normal(4)
    np.testing.assert_array_equal(base, again)
    assert not np.array_equal(base, side)



def test_brownian_rejects_bad_arguments():
    with pytest.raises(InvalidArgument):
        brownian_dyadic(0.0, 4, 0)
    with pytest.raises(InvalidArgument):
        brownian_dyadic(1.0, 0, 0)


def test_fbm_shape_and_determinism():
    f = fbm_cholesky(0.3, 64, 1.0, 2)
    assert f.values.shape == (65,)
    assert f.values[0] == 0.0
    np.testing.assert_array_equal(f.values, fbm_cholesky(0.3, 64, 1.0, 2).values)


@pytest.mark.parametrize("H, N, T", [(1.0, 16, 1.0), (0.0, 16, 1.0), (0.5, 0, 1.0),
                                     (0.5, FBM_MAX_N + 1, 1.0), (0.5, 16, -1.0)])
def test_fbm_rejects_bad_arguments(H, N, T):
    with pytest.raises(InvalidArgument):
        fbm_cholesky(H, N, T, 0)


@pytest.mark.parametrize("H", [0.3, 0.7])
def test_fbm_matches_its_covariance(H):
    samples = np.array([fbm_cholesky(H, 64, 1.0, seed).values for seed in range(500)])
    t = np.linspace(0.0, 1.0, 65)
    for i, j in [(16, 48), (32, 64), (8, 56)]:
        s, u = t[i], t[j]
        expected = 0.5 * (s ** (2 * H) + u ** (2 * H) - abs(u - s) ** (2 * H))
        assert np.mean(samples[:, i] * samples[:, j]) == pytest.approx(expected, abs=0.25)
    for i in (32, 64):
        assert np.var(samples[:, i]) == pytest.approx(t[i] ** (2 * H), rel=0.25)


def test_fbm_at_one_half_has_uncorrelated_increments():
    increments = np.array([np.diff(fbm_cholesky(0.5, 256, 1.0, seed).values)
                           for seed in range(200)])
    lag = np.corrcoef(increments[:, :-1].ravel(), increments[:, 1:].ravel())[0, 1]
    assert abs(lag) <= 0.02


def test_fbm_at_one_half_agrees_with_brownian_in_law():
    fbm = [fbm_cholesky(0.5, 16, 1.0, seed).values[-1] for seed in range(1000, 1500)]
    brownian = [brownian_dyadic(1.0, 4, seed)[0].values[-1] for seed in range(500)]
    assert ks_2samp(fbm, brownian).pvalue > 0.01



def test_kono_spec_validation():
    with pytest.raises(InvalidSpec):
        KonoSpec(3, 0.5, (1, 1, -1), 4)
    with pytest.raises(InvalidSpec):
        KonoSpec(4, 0.5, (1, 1, 1, 1), 4)
    with pytest.raises(InvalidSpec):
        KonoSpec(4, 0.5, (1, 1, -1), 4)
    with pytest.raises(InvalidSpec):
        KonoSpec(4, 0.5, (1, 1, 1, -1), 0)


def test_kono_values_at_quarters():
    w = kono_path(KonoSpec(4, 0.5, (1, 1, 1, -1), 7))
    n = 4 ** 7
    assert w.values[0] == 0.0
    assert w.values[n // 4] == 0.5
    assert w.values[n // 2] == 1.0
    assert w.values[3 * n // 4] == 1.5
    assert w.values[-1] == 1.0


def test_step_path_errors():
    lam = make_dyadic_sequence(1.0, 2, 3)
    with pytest.raises(InvalidArgument):
        step_path([(0.5, 1.0), (0.5, 2.0)], lam)
    with pytest.raises(AccessibilityViolation):
        step_path([(0.3, 1.0)], lam)
    with pytest.raises(InvalidArgument):
        step_path([(0.0, 1.0)], lam)


def test_step_path_values():
    lam = make_dyadic_sequence(1.0, 2, 2)
    f = step_path([(0.5, 1.0), (0.75, -2.0)], lam, start=1.0)
    assert f.style == CADLAG_STEP
    np.testing.assert_array_equal(f.values, [1.0, 1.0, 2.0, 0.0, 0.0])


def test_skeleton_walks_in_steps_of_two_to_minus_m():
    B, _ = brownian_dyadic(1.0, 14, 4)
    skeleton = first_passage_skeleton(B, 2)
    assert skeleton.steps > 0
    assert not skeleton.exhausted
    np.testing.assert_array_equal(np.abs(np.diff(skeleton.levels)), 0.25)
    assert np.all(np.diff(skeleton.tau) >= 0)
    assert skeleton.tau[-1] <= 1.0
    np.testing.assert_allclose(skeleton.calendar[:3], [0.0, 1 / 16, 2 / 16])
    # the walk hits its bands where the interpolated path does
    np.testing.assert_allclose(np.asarray(B.at(skeleton.tau)), skeleton.levels, atol=1e-12)


def test_skeleton_needs_a_fine_continuous_path():
    B, _ = brownian_dyadic(1.0, 6, 0)
    with pytest.raises(InvalidArgument):
        first_passage_skeleton(B, 2)
    lam = make_dyadic_sequence(1.0, 2, 10)
    with pytest.raises(InvalidArgument):
        first_passage_skeleton(step_path([(0.5, 1.0)], lam), 1)


def test_skeleton_of_a_ramp_crosses_at_half_units():
    grid = Partition(np.arange(2049) / 1024.0)
    ramp = SampledPath(grid, grid.points)
    skeleton = first_passage_skeleton(ramp, 1)
    np.testing.assert_allclose(skeleton.tau, [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_array_equal(np.diff(skeleton.levels), 0.5)
    assert not skeleton.bridged


def test_linear_skeleton_needs_a_finer_mesh_than_the_bridged_one():
    B, _ = brownian_dyadic(1.0, 10, 1)
    with pytest.raises(InvalidArgument):
        first_passage_skeleton(B, 2)
    assert first_passage_skeleton(B, 2, bridge_seed=1).bridged


def test_bridged_skeleton_walks_in_exact_steps():
    B, _ = brownian_dyadic(2.0, 12, 5)
    skeleton = first_passage_skeleton(B, 3, bridge_seed=5)
    again = first_passage_skeleton(B, 3, bridge_seed=5)
    np.testing.assert_array_equal(skeleton.tau, again.tau)
    np.testing.assert_array_equal(np.abs(np.diff(skeleton.levels)), 0.125)
    assert np.all(np.diff(skeleton.tau) > 0)
    assert skeleton.tau[-1] <= 2.0
    assert skeleton.steps > 64


def test_passage_times_approach_the_calendar():
    drift = []
    for m in (2, 3, 4):
        gaps = []
        for seed in range(12):
            B, _ = brownian_dyadic(2.0, 14, seed)
            skeleton = first_passage_skeleton(B, m, bridge_seed=seed)
            k = min(4 ** m, skeleton.steps) + 1
            gaps.append(np.max(np.abs(skeleton.tau[:k] - skeleton.calendar[:k])))
        drift.append(np.mean(gaps))
    assert drift[0] > drift[1] > drift[2]



def test_fourier_residue_form_matches_enumeration():
    spec = FourierPairSpec(8, 64, 1)
    fast = fourier_pair_sums(spec)
    slow = fourier_pair_sums_direct(spec)
    assert fast.G == pytest.approx(slow.G, rel=1e-9, abs=1e-12)
    assert fast.F == pytest.approx(slow.F, rel=1e-9, abs=1e-12)
    assert fast.Z_lc == pytest.approx(fast.G + fast.F)
    assert fast.Z_rc == pytest.approx(fast.G - fast.F)


def test_fourier_sums_are_cauchy_sums_of_the_pair():
    spec = FourierPairSpec(16, 256, 3)
    X, Y = fourier_pair_paths(spec)
    sums = fourier_pair_sums(spec)
    assert lc_sum(Y, X, X.grid) == pytest.approx(sums.Z_lc, rel=1e-9, abs=1e-10)
    assert rc_sum(Y, X, X.grid) - lc_sum(Y, X, X.grid) == pytest.approx(
        float(np.sum(np.diff(X.values) * np.diff(Y.values))), abs=1e-12)


def test_fourier_spec_validation():
    with pytest.raises(InvalidSpec):
        FourierPairSpec(1, 64, 0)
    with pytest.raises(InvalidSpec):
        FourierPairSpec(64, 32, 0)


@pytest.mark.parametrize("n", [16, 64, 256])
def test_exact_mean_exceeds_logarithmic_bound(n):
    bound = 2.0 / np.pi ** 2 * (np.log(n) - 1.0)
    assert fourier_exact_mean(n, 4096) >= bound


def test_nonexistence_growth_summary():
    summary = nonexistence_growth((8, 32), 256, 4, seed=0, threads=2)
    assert summary.samples.shape == (4, 2)
    assert summary.slope > 0
    assert np.all(summary.exact_means >= summary.lower_bounds)
    with pytest.raises(InvalidArgument):
        nonexistence_growth((8,), 256, 1)
    with pytest.raises(InvalidArgument):
        nonexistence_growth((), 256, 4)
