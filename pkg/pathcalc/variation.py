"""Partition sums, p-variation, quadratic lambda-variation and the index estimator."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pathcalc.config import CAUCHY_ATOL, CAUCHY_LEVELS, CAUCHY_RTOL, CLAMP_ATOL, INDEX_WINDOW
from pathcalc.errors import DegeneratePath, InvalidArgument
from pathcalc.paths import (
    Partition, PartitionSequence, SampledPath, align, jump_set, per_level_trace_sums,
)

logger = logging.getLogger(__name__)


def cauchy_converged(values: np.ndarray, rtol: float = CAUCHY_RTOL, atol: float = CAUCHY_ATOL,
                     window: int = CAUCHY_LEVELS) -> bool:
    """Cauchy-in-level verdict over the last ``window`` levels.

    ``values`` has levels along axis 0; extra axes (a grid of times) are
    compared in sup-norm. Fewer than ``window`` levels never converge.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[0] < window:
        return False
    tail = v[-window:]
    gap = float(np.max(tail.max(axis=0) - tail.min(axis=0)))
    scale = float(np.max(np.abs(tail)))
    return gap <= atol + rtol * scale


def sp_sum(f: SampledPath, kappa: Partition, p: float) -> float:
    """s_p(f; kappa), the sum of |increments|**p over kappa."""
    if p <= 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    values = np.asarray(f.at(kappa.points), dtype=float)
    return float(np.sum(np.abs(np.diff(values)) ** p))


@dataclass(frozen=True, eq=False)
class PVariationResult:
    value: float
    points: np.ndarray
    fine_partition_fallback: bool = False


def _local_extrema(x: np.ndarray) -> np.ndarray:
    """Indices of the endpoints and turning points after collapsing repeated values."""
    if x.size <= 2:
        return np.arange(x.size)
    keep = np.concatenate(([True], np.diff(x) != 0))
    idx = np.flatnonzero(keep)
    if idx[-1] != x.size - 1:
        idx = np.append(idx, x.size - 1)
    y = x[idx]
    d = np.sign(np.diff(y))
    turning = np.flatnonzero(d[1:] != d[:-1]) + 1
    return idx[np.concatenate(([0], turning, [idx.size - 1]))]


def p_variation(f: SampledPath, p: float) -> PVariationResult:
    """Exact p-variation over sub-partitions of the sampling grid.

    For p >= 1 the maximizing partition only uses turning points, so the
    dynamic program V[j] = max_{i<j} V[i] + |x_j - x_i|**p runs on those.

    Args:
        f: The sampled path.
        p: The variation exponent.

    Returns:
        The maximum, the times of a maximizing partition, and whether the
        p < 1 fallback (the full grid sum) was used.

    Raises:
        InvalidArgument: If p is not positive.
    """
    if p <= 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    x = f.values
    if p < 1:
        logger.warning(f"p={p} < 1: reporting s_p on the full grid instead of the supremum")
        return PVariationResult(sp_sum(f, f.grid, p), f.grid.points, True)

    idx = _local_extrema(x)
    y = x[idx]
    n = y.size
    V = np.zeros(n)
    back = np.zeros(n, dtype=int)
    for j in range(1, n):
        cand = V[:j] + np.abs(y[j] - y[:j]) ** p
        i = int(np.argmax(cand))
        V[j] = cand[i]
        back[j] = i
    chain = [n - 1]
    while chain[-1] != 0:
        chain.append(back[chain[-1]])
    points = f.grid.points[idx[np.array(chain[::-1])]]
    return PVariationResult(float(V[-1]), points)


def sigma_p(f: SampledPath, p: float) -> float:
    """Sum of |jump|**p over all left and right jumps."""
    if p <= 0:
        raise InvalidArgument(f"p must be positive, got {p}")
    jumps = jump_set(f)
    if not len(jumps):
        return 0.0
    return float(np.sum(np.abs(jumps.minus) ** p) + np.sum(np.abs(jumps.plus) ** p))


@dataclass(frozen=True, eq=False)
class BracketResult:
    """[f]_lambda on the grid with its continuous and jump parts."""

    grid: Partition
    total: np.ndarray
    continuous_part: np.ndarray
    jump_part: np.ndarray
    per_level_s2: np.ndarray
    jump_minus: np.ndarray
    jump_plus: np.ndarray
    converged: bool

    @property
    def final(self) -> float:
        return float(self.total[-1])

    def level_finals(self) -> np.ndarray:
        return self.per_level_s2[:, -1]


@dataclass(frozen=True, eq=False)
class CovariationResult:
    """[f, g]_lambda on the grid; same layout as BracketResult, signed."""

    grid: Partition
    total: np.ndarray
    continuous_part: np.ndarray
    jump_part: np.ndarray
    per_level_c: np.ndarray
    jump_minus: np.ndarray
    jump_plus: np.ndarray
    converged: bool

    @property
    def final(self) -> float:
        return float(self.total[-1])


def accumulate_jumps(minus: np.ndarray, plus: np.ndarray) -> np.ndarray:
    """Sum over (a, t] of the left terms plus the sum over [a, t) of the right terms."""
    shifted = np.concatenate(([0.0], np.cumsum(plus)[:-1]))
    return np.cumsum(minus) + shifted


def quadratic_variation(f: SampledPath, lam: PartitionSequence,
                        rtol: Optional[float] = None) -> BracketResult:
    """Quadratic lambda-variation of f with its per-level partition sums.

    Raises:
        AccessibilityViolation: If a jump of f is not on the finest level.
    """
    f = align(f, lam)
    v = f.values
    per_level = per_level_trace_sums(v, v, lam, "cross")
    total = per_level[-1]
    jm = f.delta_minus ** 2
    jp = f.delta_plus ** 2
    jump = accumulate_jumps(jm, jp)
    cont = total - jump
    if np.min(cont) < -CLAMP_ATOL:
        logger.warning(
            f"continuous bracket part dips to {np.min(cont):.3e}; right jumps are not "
            f"resolved by the finest level"
        )
    cont = np.maximum(cont, 0.0)
    converged = cauchy_converged(per_level, rtol=CAUCHY_RTOL if rtol is None else rtol)
    if not converged:
        logger.debug(f"bracket not Cauchy over the last {CAUCHY_LEVELS} of {lam.depth} levels")
    return BracketResult(f.grid, total, cont, jump, per_level, jm, jp, converged)


def quadratic_covariation(f: SampledPath, g: SampledPath, lam: PartitionSequence,
                          rtol: Optional[float] = None) -> CovariationResult:
    """Quadratic lambda-covariation [f, g] with the signed jump decomposition."""
    f = align(f, lam)
    g = align(g, lam)
    per_level = per_level_trace_sums(f.values, g.values, lam, "cross")
    total = per_level[-1]
    jm = f.delta_minus * g.delta_minus
    jp = f.delta_plus * g.delta_plus
    jump = accumulate_jumps(jm, jp)
    converged = cauchy_converged(per_level, rtol=CAUCHY_RTOL if rtol is None else rtol)
    return CovariationResult(f.grid, total, total - jump, jump, per_level, jm, jp, converged)


@dataclass(frozen=True)
class IndexEstimate:
    per_level: Tuple[Tuple[int, int, float, float], ...]
    fitted: float
    window: int


def level_s2(f: SampledPath, lam: PartitionSequence) -> np.ndarray:
    """s_2(f; lambda_m) over the whole interval, for every level."""
    f = align(f, lam)
    v = f.values
    return np.array([np.sum(np.diff(v[lam.level_indices(m)]) ** 2)
                     for m in range(1, lam.depth + 1)])


def gladyshev_index(f: SampledPath, lam: PartitionSequence,
                    window: int = INDEX_WINDOW) -> IndexEstimate:
    """Estimate the Orey index from rescaled dyadic quadratic sums.

    The fit regresses log sqrt(s_2) on log N_m over the last ``window``
    levels; the estimate is 1/2 minus the slope.

    Raises:
        InvalidArgument: If the window is shorter than 2 or longer than the depth.
        DegeneratePath: If s_2 vanishes at a level used by the fit.
    """
    if window < 2 or window > lam.depth:
        raise InvalidArgument(f"window must be in 2..{lam.depth}, got {window}")
    s2 = level_s2(f, lam)
    counts = lam.counts()
    used = slice(lam.depth - window, lam.depth)
    if np.any(s2[used] <= 0):
        raise DegeneratePath("s_2 vanishes at a level used by the index fit")
    per_level = []
    for m in range(1, lam.depth + 1):
        s = float(s2[m - 1])
        n_m = counts[m - 1]
        est = 0.5 - np.log(s) / (2.0 * np.log(n_m)) if s > 0 else float("nan")
        per_level.append((m, int(n_m), s, float(est)))
    slope, _ = np.polyfit(np.log(counts[used]), np.log(np.sqrt(s2[used])), 1)
    fitted = 0.5 - float(slope)
    logger.debug(f"index fit over levels {lam.depth - window + 1}..{lam.depth}: {fitted:.4f}")
    return IndexEstimate(tuple(per_level), fitted, window)


@dataclass(frozen=True, eq=False)
class WienerReport:
    sigma2: float
    per_level_s2: np.ndarray
    consistent: bool


def wiener_diagnostic(f: SampledPath, lam: PartitionSequence, rtol: float = CAUCHY_RTOL,
                      atol: float = CAUCHY_ATOL, window: int = CAUCHY_LEVELS) -> WienerReport:
    """Check whether the level sums s_2 settle on the jump sum sigma_2.

    The verdict is a finite-depth heuristic: paths with the local 2-variation
    have s_2 tending to sigma_2, while continuous rough paths keep s_2 away
    from sigma_2 = 0.
    """
    sig = sigma_p(align(f, lam), 2.0)
    s2 = level_s2(f, lam)
    tail = s2[-min(window, s2.size):]
    gaps = np.abs(tail - sig)
    consistent = bool(np.all(gaps <= atol + rtol * max(sig, float(np.max(tail)))))
    logger.debug(f"sigma_2={sig:.6g}, finest s_2={s2[-1]:.6g}, consistent={consistent}")
    return WienerReport(sig, s2, consistent)

