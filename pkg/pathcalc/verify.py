"""Identity verification suite.

Each check rebuilds one of the pathwise identities on generated paths and
compares it against a fixed threshold. Checks run in isolation: a crash in
one is logged and reported, and the rest still run.
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from pathcalc.config import FD_STEP, PATHCALC_THREADS
from pathcalc.errors import InvalidArgument
from pathcalc.finance import BsParams, bs_derivatives, bs_pde_residual, bs_price, binomial_gap, hedge
from pathcalc.generators import (
    KonoSpec, brownian_dyadic, fbm_cholesky, first_passage_skeleton, kono_path,
    nonexistence_growth, step_path,
)
from pathcalc.messages import get_text
from pathcalc.paths import CADLAG_STEP, CONTINUOUS, Partition, PartitionSequence, SampledPath, make_dyadic_sequence
from pathcalc.product import (
    FORWARD, doleans, doleans_bracket_gap, duality_roundtrip, linear_equation_residual,
)
from pathcalc.stieltjes import EXP, chain_rule_residual_path, covariation_sum, lc_sum, rc_sum
from pathcalc.variation import gladyshev_index, level_s2, p_variation, quadratic_variation, sp_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float

    @property
    def line(self) -> str:
        key = "check_passed" if self.passed else "check_failed"
        return get_text(key, name=self.name, detail=self.detail)


def _need(total: int, fraction: float) -> int:
    return int(np.ceil(fraction * total - 1e-9))


def _sup(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


class IdentityVerifier:
    """Run the acceptance checks, optionally on shrunken ensembles."""

    def __init__(self, quick: bool = False, threads: Optional[int] = None,
                 only: Optional[Iterable[str]] = None):
        self.quick = quick
        self.threads = PATHCALC_THREADS if threads is None else threads
        self.only = set(only) if only else None

    def checks(self) -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
        table = [
            ("kono-exactness", self.check_kono),
            ("partition-identities", self.check_identities),
            ("pvariation-oracle", self.check_pvariation),
            ("brownian-bracket", self.check_brownian_bracket),
            ("chain-rule", self.check_chain_rule),
            ("doleans-duality", self.check_doleans),
            ("doleans-bracket", self.check_doleans_bracket),
            ("index-estimator", self.check_index),
            ("binomial-limit", self.check_binomial),
            ("self-financing-hedge", self.check_hedge),
            ("nonexistence-growth", self.check_nonexistence),
            ("pde-residual", self.check_pde),
        ]
        if self.only is None:
            return table
        unknown = self.only - {name for name, _ in table}
        if unknown:
            raise InvalidArgument(f"unknown checks: {', '.join(sorted(unknown))}")
        return [(name, fn) for name, fn in table if name in self.only]

    def run(self) -> List[CheckResult]:
        """Run every selected check and log one line per result."""
        results = []
        for name, check in self.checks():
            logger.info(f"Running check {name}...")
            start = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as e:
                logger.error(f"Check {name} crashed: {e}", exc_info=True)
                passed, detail = False, get_text("check_crashed", name=name, detail=e)
            result = CheckResult(name, bool(passed), detail, time.perf_counter() - start)
            if result.passed:
                logger.info(result.line)
            else:
                logger.warning(result.line)
            results.append(result)
        return results

    def _ensemble(self, fn: Callable[[int], object], seeds: Sequence[int]) -> list:
        """Map fn over seeds in parallel; results come back in seed order."""
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, seeds))

    def _seeds(self, full: int, quick: int) -> range:
        return range(quick if self.quick else full)

    # Deterministic checks

    def check_kono(self) -> Tuple[bool, str]:
        spec = KonoSpec(4, 0.5, (1, 1, 1, -1), 7)
        w = kono_path(spec)
        lam = make_dyadic_sequence(1.0, 4, 7)
        bracket = quadratic_variation(w, lam)
        times = lam.finest.points
        error = 0.0
        for m in range(1, lam.depth + 1):
            idx = lam.level_indices(m)
            error = max(error, _sup(bracket.per_level_s2[m - 1][idx] - times[idx]))
        index = gladyshev_index(w, lam)
        index_error = max(abs(est - 0.5) for _, _, _, est in index.per_level)
        index_error = max(index_error, abs(index.fitted - 0.5))
        passed = error <= 1e-9 and index_error <= 1e-9
        return passed, get_text("detail_kono", error=error, index_error=index_error)

    def check_identities(self) -> Tuple[bool, str]:
        count = 40 if self.quick else 200

        def one(seed: int) -> float:
            rng = np.random.Generator(np.random.Philox(seed))
            n = int(rng.integers(3, 1026))
            grid = Partition(np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, n - 2)), [1.0])))
            styles = [CONTINUOUS if rng.random() < 0.5 else CADLAG_STEP for _ in range(2)]
            f = SampledPath(grid, np.cumsum(rng.standard_normal(n)), styles[0])
            g = SampledPath(grid, np.cumsum(rng.standard_normal(n)), styles[1])
            coarse = np.flatnonzero(rng.random(n) < 0.3)
            coarse = np.unique(np.concatenate(([0], coarse, [n - 1])))
            lam = PartitionSequence.explicit([grid.points[coarse], grid.points])
            worst = 0.0
            for kappa in lam.levels:
                a = np.asarray(f.at(kappa.points))
                b = np.asarray(g.at(kappa.points))
                scale = 1.0 + np.sum(np.abs(a[:-1] * np.diff(b))) + np.sum(np.abs(b[:-1] * np.diff(a))) \
                    + np.sum(np.abs(a[1:] * np.diff(b))) + sp_sum(f, kappa, 2) + sp_sum(g, kappa, 2)
                C = covariation_sum(f, g, kappa)
                s2f = sp_sum(f, kappa, 2)
                gaps = [
                    rc_sum(f, g, kappa) - lc_sum(f, g, kappa) - C,
                    lc_sum(f, g, kappa) + lc_sum(g, f, kappa) + C - (a[-1] * b[-1] - a[0] * b[0]),
                    lc_sum(f, f, kappa) - 0.5 * (a[-1] ** 2 - a[0] ** 2 - s2f),
                    rc_sum(f, f, kappa) - 0.5 * (a[-1] ** 2 - a[0] ** 2 + s2f),
                    C - 0.25 * (sp_sum(f + g, kappa, 2) - sp_sum(f - g, kappa, 2)),
                ]
                worst = max(worst, max(abs(x) for x in gaps) / scale)
            return worst

        errors = self._ensemble(one, range(count))
        error = max(errors)
        return error <= 1e-12, get_text("detail_identities", paths=count, error=error)

    def check_pvariation(self) -> Tuple[bool, str]:
        patterns = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=9)))
        if self.quick:
            patterns = patterns[::9]
        paths = np.hstack((np.zeros((patterns.shape[0], 1)), patterns))
        grid = Partition(np.arange(10.0))
        interior = range(1, 9)
        subsets = [
            np.array((0,) + combo + (9,))
            for r in range(len(interior) + 1)
            for combo in itertools.combinations(interior, r)
        ]
        mismatches = 0
        cases = 0
        for p in (1.0, 1.5, 2.0, 3.0):
            oracle = np.full(paths.shape[0], -np.inf)
            for idx in subsets:
                terms = np.abs(np.diff(paths[:, idx], axis=1)) ** p
                total = np.zeros(paths.shape[0])
                for j in range(terms.shape[1]):
                    total = total + terms[:, j]
                oracle = np.maximum(oracle, total)
            for row, expected in zip(paths, oracle):
                got = p_variation(SampledPath(grid, row), p).value
                cases += 1
                if p == int(p):
                    ok = got == expected
                else:
                    ok = abs(got - expected) <= 1e-12 * max(1.0, expected)
                mismatches += 0 if ok else 1
        return mismatches == 0, get_text("detail_pvar", cases=cases, mismatches=mismatches)

    def check_pde(self) -> Tuple[bool, str]:
        params = BsParams(K=1.1, r=0.05, sigma=1.0, T=1.0)
        t, x = np.meshgrid(np.linspace(0.01, 0.9, 50), np.linspace(0.2, 3.0, 50), indexing="ij")
        pde = _sup(bs_pde_residual(params, t, x))
        phi_t, phi_x, phi_xx = bs_derivatives(params, t, x)
        h = FD_STEP
        k = 10.0 * FD_STEP
        fd_t = (bs_price(params, t + h, x) - bs_price(params, t - h, x)) / (2.0 * h)
        fd_x = (bs_price(params, t, x + h) - bs_price(params, t, x - h)) / (2.0 * h)
        fd_xx = (bs_price(params, t, x + k) - 2.0 * bs_price(params, t, x)
                 + bs_price(params, t, x - k)) / (k * k)
        fd = max(_sup(fd_t - phi_t), _sup(fd_x - phi_x), _sup(fd_xx - phi_xx))
        return pde <= 1e-8 and fd <= 1e-5, get_text("detail_pde", pde=pde, fd=fd)

    # Statistical checks

    def check_brownian_bracket(self) -> Tuple[bool, str]:
        lam = make_dyadic_sequence(1.0, 2, 14)
        seeds = self._seeds(100, 25)

        def one(seed: int) -> bool:
            B, _ = brownian_dyadic(1.0, 14, seed)
            return abs(level_s2(B, lam)[-1] - 1.0) <= 0.05

        hits = sum(self._ensemble(one, seeds))
        need = _need(len(seeds), 0.95)
        return hits >= need, get_text("detail_fraction", hits=hits, total=len(seeds), need=need)

    def check_chain_rule(self) -> Tuple[bool, str]:
        seeds = self._seeds(100, 20)
        fine = make_dyadic_sequence(1.0, 2, 14)
        coarse = make_dyadic_sequence(1.0, 2, 10)

        def one(seed: int) -> Tuple[float, float]:
            B, tower = brownian_dyadic(1.0, 14, seed)
            B10 = SampledPath(coarse.finest, tower[10])
            return (_sup(chain_rule_residual_path(EXP, B, fine)),
                    _sup(chain_rule_residual_path(EXP, B10, coarse)))

        residuals = np.array(self._ensemble(one, seeds))
        hits = int(np.sum(residuals[:, 0] <= 0.02))
        need = _need(len(seeds), 0.9)
        med_fine = float(np.median(residuals[:, 0]))
        med_coarse = float(np.median(residuals[:, 1]))
        passed = hits >= need and med_fine < med_coarse
        return passed, get_text("detail_chain_rule", hits=hits, total=len(seeds), need=need,
                                fine=med_fine, fine_depth=14, coarse=med_coarse, coarse_depth=10)

    def check_doleans(self) -> Tuple[bool, str]:
        seeds = self._seeds(50, 12)
        lam = make_dyadic_sequence(1.0, 2, 14)

        def one(seed: int) -> Tuple[bool, bool]:
            B, _ = brownian_dyadic(1.0, 14, seed)
            equation = linear_equation_residual(B, lam).sup
            duality = duality_roundtrip(B, lam).generator_gap
            return equation <= 0.02, duality <= 0.05

        outcomes = self._ensemble(one, seeds)
        eq_hits = sum(a for a, _ in outcomes)
        dual_hits = sum(b for _, b in outcomes)
        need = _need(len(seeds), 0.9)

        jump_lam = make_dyadic_sequence(1.0, 2, 4)
        f = step_path([(0.25, 0.5), (0.5, -0.3), (0.8125, 0.2)], jump_lam)
        E = doleans(f, jump_lam, FORWARD)
        exact = np.cumprod(1.0 + f.delta_minus)
        jump_error = max(_sup(E.values - exact), linear_equation_residual(f, jump_lam).sup,
                         duality_roundtrip(f, jump_lam).generator_gap)
        passed = eq_hits >= need and dual_hits >= need and jump_error <= 1e-12
        return passed, get_text("detail_doleans", eq_hits=eq_hits, dual_hits=dual_hits,
                                total=len(seeds), need=need, jump_error=jump_error)

    def check_doleans_bracket(self) -> Tuple[bool, str]:
        seeds = self._seeds(50, 12)
        lam = make_dyadic_sequence(1.0, 2, 14)

        def one(seed: int) -> bool:
            B, _ = brownian_dyadic(1.0, 14, seed)
            gap, _, rhs = doleans_bracket_gap(B, lam)
            return gap <= 0.05 * abs(rhs)

        hits = sum(self._ensemble(one, seeds))
        need = _need(len(seeds), 0.9)
        return hits >= need, get_text("detail_fraction", hits=hits, total=len(seeds), need=need)

    def check_index(self) -> Tuple[bool, str]:
        depth = 10 if self.quick else 12
        seeds = self._seeds(20, 5)
        lam = make_dyadic_sequence(1.0, 2, depth)
        errors = {}
        for H in (0.3, 0.5, 0.7):
            def one(seed: int) -> float:
                path = fbm_cholesky(H, 2 ** depth, 1.0, seed)
                return abs(gladyshev_index(path, lam).fitted - H)

            errors[H] = float(np.mean(self._ensemble(one, seeds)))
        passed = all(e <= 0.05 for e in errors.values())
        text = ", ".join(f"H={H}: {e:.3f}" for H, e in errors.items())
        return passed, get_text("detail_index", errors=text)

    def check_binomial(self) -> Tuple[bool, str]:
        seeds = self._seeds(50, 15)

        def one(seed: int) -> Tuple[float, float, float, float]:
            B, _ = brownian_dyadic(2.0, 17, seed)
            fine = binomial_gap(first_passage_skeleton(B, 6, bridge_seed=seed), B, T=1.0)
            coarse = binomial_gap(first_passage_skeleton(B, 4, bridge_seed=seed), B, T=1.0)
            return fine.coupled_gap, coarse.coupled_gap, fine.calendar_gap, coarse.calendar_gap

        gaps = np.array(self._ensemble(one, seeds))
        hits = int(np.sum(gaps[:, 0] <= 0.1))
        need = _need(len(seeds), 0.8)
        medians = np.median(gaps, axis=0)
        passed = hits >= need and medians[0] < medians[1] and medians[2] < medians[3]
        return passed, get_text("detail_binomial", hits=hits, total=len(seeds), need=need,
                                coupled_fine=medians[0], coupled_coarse=medians[1],
                                calendar_fine=medians[2], calendar_coarse=medians[3],
                                m_fine=6, m_coarse=4)

    def check_hedge(self) -> Tuple[bool, str]:
        seeds = self._seeds(50, 12)
        lam = make_dyadic_sequence(1.0, 2, 14)
        params = BsParams(K=1.1, r=0.05, sigma=1.0, T=1.0)

        def one(seed: int) -> bool:
            B, _ = brownian_dyadic(1.0, 14, seed)
            P = doleans(B * params.sigma, lam, FORWARD).path
            report = hedge(params, P, lam)
            return report.sup_residual <= 0.02 * report.scale

        hits = sum(self._ensemble(one, seeds))
        need = _need(len(seeds), 0.9)

        kono_lam = make_dyadic_sequence(1.0, 4, 7)
        w = kono_path(KonoSpec(4, 0.5, (1, 1, 1, -1), 7))
        P = doleans(w, kono_lam, FORWARD).path
        report = hedge(BsParams(K=float(np.sqrt(np.e)), r=0.0, sigma=1.0, T=1.0), P, kono_lam)
        tail = report.gain_tail.level_values()
        gaps = np.abs(np.diff(tail))
        n_fine = kono_lam.finest.n
        tail_ok = True
        for m in range(3, kono_lam.depth + 1):
            # r = 0: the gain step over [u_{m-1}, u_m] is the call value step
            step = report.V[n_fine - 4 ** (7 - m)] - report.V[n_fine - 4 ** (8 - m)]
            tail_ok &= gaps[m - 2] <= 4.0 * 2.0 ** -m
            tail_ok &= abs(abs(step) - gaps[m - 2]) <= 2.0 * report.sup_residual + 1e-12
        deltas = []
        for m in range(4, 8):
            beta = report.beta[n_fine - 4 ** (7 - m)]
            target = ndtr(1.0) if m % 2 else ndtr(-1.0)
            deltas.append(abs(beta - target))
        delta_ok = all(d <= 0.02 for d in deltas)
        passed = hits >= need and tail_ok and delta_ok
        return passed, get_text(
            "detail_hedge", hits=hits, total=len(seeds), need=need,
            gaps=", ".join(f"{g:.4f}" for g in gaps[1:]),
            deltas=", ".join(f"{d:.4f}" for d in deltas),
        )

    def check_nonexistence(self) -> Tuple[bool, str]:
        reps = 100 if self.quick else 500
        summary = nonexistence_growth((16, 64, 256, 1024), 2 ** 14, reps, seed=0,
                                      threads=self.threads)
        excess = float(np.min(summary.exact_means - summary.lower_bounds))
        variance = float(np.max(summary.sample_vars))
        passed = excess >= 0.0 and summary.slope >= 0.15 and variance <= 12.0
        return passed, get_text("detail_nonex", slope=summary.slope, excess=excess,
                                variance=variance)


def all_passed(results: Sequence[CheckResult]) -> bool:
    return all(r.passed for r in results)
