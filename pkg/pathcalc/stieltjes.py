"""Cauchy sums, Left/Right Cauchy lambda-integrals, Young integrals against
bounded-variation integrators and the pathwise chain rule."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from pathcalc.config import CAUCHY_RTOL, FD_STEP
from pathcalc.errors import InvalidArgument
from pathcalc.paths import (
    CADLAG_STEP, CONTINUOUS, Partition, PartitionSequence, SampledPath, align, trace_partition,
)
from pathcalc.variation import (
    BracketResult, CovariationResult, accumulate_jumps, cauchy_converged, quadratic_variation,
)

logger = logging.getLogger(__name__)

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

BvIntegrator = Union[BracketResult, CovariationResult, SampledPath]


def _check_side(side: str) -> str:
    if side not in SIDES:
        raise InvalidArgument(f"side must be 'left' or 'right', got {side}")
    return side


def lc_sum(integrand: SampledPath, integrator: SampledPath, kappa: Partition) -> float:
    """Left Cauchy sum: sum of integrand(x_{i-1}) * (integrator(x_i) - integrator(x_{i-1}))."""
    a = np.asarray(integrand.at(kappa.points))
    b = np.asarray(integrator.at(kappa.points))
    return float(np.sum(a[:-1] * np.diff(b)))


def rc_sum(integrand: SampledPath, integrator: SampledPath, kappa: Partition) -> float:
    """Right Cauchy sum: sum of integrand(x_i) * (integrator(x_i) - integrator(x_{i-1}))."""
    a = np.asarray(integrand.at(kappa.points))
    b = np.asarray(integrator.at(kappa.points))
    return float(np.sum(a[1:] * np.diff(b)))


def covariation_sum(f: SampledPath, g: SampledPath, kappa: Partition) -> float:
    """C(f, g; kappa), the sum of products of increments."""
    a = np.asarray(f.at(kappa.points))
    b = np.asarray(g.at(kappa.points))
    return float(np.sum(np.diff(a) * np.diff(b)))


@dataclass(frozen=True)
class JumpCheck:
    """Predicted and finest-level jumps of an indefinite integral at an integrator jump."""

    time: float
    predicted_minus: float
    observed_minus: float
    predicted_plus: float

    @property
    def gap(self) -> float:
        return abs(self.predicted_minus - self.observed_minus)


@dataclass(frozen=True)
class IntegralEstimate:
    per_level: Tuple[Tuple[int, float], ...]
    value: float
    converged: bool
    side: str
    interval: Tuple[float, float] = (0.0, 0.0)
    jump_checks: Tuple[JumpCheck, ...] = ()

    def level_values(self) -> np.ndarray:
        return np.array([v for _, v in self.per_level])


def indefinite_values(integrand: SampledPath, integrator: SampledPath,
                      side: str = LEFT) -> np.ndarray:
    """Finest-grid cumulative Cauchy sums of two paths sharing one grid."""
    _check_side(side)
    a = integrand.values
    db = np.diff(integrator.values)
    terms = a[:-1] * db if side == LEFT else a[1:] * db
    return np.concatenate(([0.0], np.cumsum(terms)))


def indefinite_integral(integrand: SampledPath, integrator: SampledPath, lam: PartitionSequence,
                        side: str = LEFT) -> SampledPath:
    """The indefinite Cauchy lambda-integral at the finest level, as a path."""
    integrand = align(integrand, lam)
    integrator = align(integrator, lam)
    values = indefinite_values(integrand, integrator, side)
    style = CONTINUOUS if integrator.style == CONTINUOUS else CADLAG_STEP
    return SampledPath.from_limits(lam.finest, values, values, style)


def _jump_checks(integrand: SampledPath, integrator: SampledPath, cumulative: np.ndarray,
                 side: str, i0: int, i1: int) -> Tuple[JumpCheck, ...]:
    dm = integrator.delta_minus
    dp = integrator.delta_plus
    pts = integrator.grid.points
    checks = []
    for i in np.flatnonzero((dm != 0) | (dp != 0)):
        if i < i0 or i > i1:
            continue
        if side == LEFT:
            pred_minus = integrand.left_limits[i] * dm[i]
            pred_plus = integrand.values[i] * dp[i]
        else:
            pred_minus = integrand.values[i] * dm[i]
            pred_plus = integrand.right_limits[i] * dp[i]
        observed = cumulative[i] - cumulative[i - 1] if i > 0 else 0.0
        checks.append(JumpCheck(float(pts[i]), float(pred_minus), float(observed), float(pred_plus)))
    return tuple(checks)


def lambda_integral(integrand: SampledPath, integrator: SampledPath, lam: PartitionSequence,
                    side: str = LEFT, s: Optional[float] = None, t: Optional[float] = None,
                    rtol: float = CAUCHY_RTOL) -> IntegralEstimate:
    """Left or Right Cauchy lambda-integral over [s, t] with its per-level sums.

    Args:
        integrand: The path being integrated.
        integrator: The path integrated against.
        lam: The partition sequence.
        side: ``left`` for (LC), ``right`` for (RC).
        s: Start of the interval, default the sequence start.
        t: End of the interval, default the sequence end.
        rtol: Relative tolerance of the Cauchy-in-level verdict.

    Returns:
        Per-level trace sums, the finest value, the verdict and the jump
        conditions at decorated integrator jumps inside [s, t].

    Raises:
        AccessibilityViolation: If a jump of either path is off the finest level.
    """
    _check_side(side)
    integrand = align(integrand, lam)
    integrator = align(integrator, lam)
    s = lam.start if s is None else float(s)
    t = lam.T if t is None else float(t)
    summer = lc_sum if side == LEFT else rc_sum
    per_level = []
    for m in range(1, lam.depth + 1):
        kappa = trace_partition(lam.level(m), s, t)
        per_level.append((m, summer(integrand, integrator, kappa)))
    values = np.array([v for _, v in per_level])
    converged = cauchy_converged(values, rtol=rtol)
    if not converged:
        logger.debug(f"{side} Cauchy integral on [{s}, {t}] not Cauchy in level")
    pts = lam.finest.points
    i0 = int(np.searchsorted(pts, s, side="right"))
    i1 = int(np.searchsorted(pts, t, side="left"))
    checks = _jump_checks(integrand, integrator, indefinite_values(integrand, integrator, side),
                          side, i0, i1)
    return IntegralEstimate(tuple(per_level), float(values[-1]), converged, side, (s, t), checks)


def _bv_parts(V: BvIntegrator) -> Tuple[Partition, np.ndarray, np.ndarray, np.ndarray]:
    """Grid, continuous part, left jumps and right jumps of a bounded-variation integrator."""
    if isinstance(V, (BracketResult, CovariationResult)):
        return V.grid, V.continuous_part, V.jump_minus, V.jump_plus
    dm = V.delta_minus
    dp = V.delta_plus
    return V.grid, V.values - accumulate_jumps(dm, dp), dm, dp


def _on_grid(psi: SampledPath, grid: Partition) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Left limits, values, right limits and midpoint values of psi on the grid."""
    pts = grid.points
    mids = 0.5 * (pts[:-1] + pts[1:])
    if psi.grid == grid:
        return psi.left_limits, psi.values, psi.right_limits, np.asarray(psi.at(mids))
    return (np.asarray(psi.left_limit(pts)), np.asarray(psi.at(pts)),
            np.asarray(psi.right_limit(pts)), np.asarray(psi.at(mids)))


def young_bv_cumulative(psi: SampledPath, V: BvIntegrator, side: str = LEFT) -> np.ndarray:
    """Indefinite Left (or Right) Young integral of psi against V at every grid time.

    The continuous part is integrated by the midpoint refinement sum on the
    grid; jumps contribute psi(t-) dV(t) and psi(t) d+V(t) on the left side,
    psi(t) dV(t) and psi(t+) d+V(t) on the right side.
    """
    _check_side(side)
    grid, cont, dm, dp = _bv_parts(V)
    left, value, right, mid = _on_grid(psi, grid)
    rs = np.concatenate(([0.0], np.cumsum(mid * np.diff(cont))))
    if side == LEFT:
        jumps = accumulate_jumps(left * dm, value * dp)
    else:
        jumps = accumulate_jumps(value * dm, right * dp)
    return rs + jumps


def _grid_index(grid: Partition, t: Optional[float]) -> int:
    if t is None:
        return grid.points.size - 1
    i = int(np.searchsorted(grid.points, t))
    if i >= grid.points.size or grid.points[i] != t:
        raise InvalidArgument(f"t={t} is not a grid point")
    return i


def ly_integral_bv(psi: SampledPath, V: BvIntegrator, t: Optional[float] = None) -> float:
    """(LY) integral of psi against a bounded-variation V over [start, t]."""
    grid = _bv_parts(V)[0]
    return float(young_bv_cumulative(psi, V, LEFT)[_grid_index(grid, t)])


def ry_integral_bv(psi: SampledPath, V: BvIntegrator, t: Optional[float] = None) -> float:
    """(RY) integral of psi against a bounded-variation V over [start, t]."""
    grid = _bv_parts(V)[0]
    return float(young_bv_cumulative(psi, V, RIGHT)[_grid_index(grid, t)])


def weighted_quadratic_sum(h: SampledPath, f: SampledPath, lam: PartitionSequence, m: int,
                           side: str = LEFT) -> float:
    """Sum of h(x_{i-1}) (or h(x_i)) times the squared increment of f over level m."""
    _check_side(side)
    h = align(h, lam)
    f = align(f, lam)
    idx = lam.level_indices(m)
    inc = np.diff(f.values[idx]) ** 2
    weights = h.values[idx[:-1]] if side == LEFT else h.values[idx[1:]]
    return float(np.sum(weights * inc))


@dataclass(frozen=True)
class ScalarMap:
    """A C2 function given by value, first and second derivative evaluators."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    first: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "custom",
                      step: float = FD_STEP) -> "ScalarMap":
        """Derivatives by central differences with step ``step * max(1, |x|)``."""
        logger.info(f"Using finite-difference derivatives for {name}")

        def first(x):
            x = np.asarray(x, dtype=float)
            h = step * np.maximum(1.0, np.abs(x))
            return (fn(x + h) - fn(x - h)) / (2.0 * h)

        def second(x):
            x = np.asarray(x, dtype=float)
            h = step * np.maximum(1.0, np.abs(x))
            return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h)

        return cls(name, fn, first, second)


def _checked_log(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise InvalidArgument("log needs a strictly positive path")
    return np.log(x)


def _checked_reciprocal(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise InvalidArgument("the reciprocal 1/x needs a strictly positive path")
    return 1.0 / x


SQUARE = ScalarMap("square", np.square, lambda x: 2.0 * np.asarray(x),
                   lambda x: np.full_like(np.asarray(x, dtype=float), 2.0))
EXP = ScalarMap("exp", np.exp, np.exp, np.exp)
LOG = ScalarMap("log", _checked_log, _checked_reciprocal,
                lambda x: -_checked_reciprocal(x) ** 2)
IDENTITY = ScalarMap("identity", lambda x: np.asarray(x, dtype=float),
                     lambda x: np.ones_like(np.asarray(x, dtype=float)),
                     lambda x: np.zeros_like(np.asarray(x, dtype=float)))

NAMED_MAPS: Dict[str, ScalarMap] = {m.name: m for m in (SQUARE, EXP, LOG, IDENTITY)}


@dataclass(frozen=True)
class ChainRuleReport:
    lhs: float
    integral_term: IntegralEstimate
    bracket_term: float
    jump_correction: Tuple[float, float]
    residual: float
    side: str


def _chain_rule_terms(phi: ScalarMap, f: SampledPath, bracket: BracketResult, side: str):
    """Cumulative integral, bracket and jump terms of the chain rule at every grid time."""
    v = f.values
    left = f.left_limits
    right = f.right_limits
    integral = indefinite_values(f.map(phi.first), f, side)
    pts = f.grid.points
    mids = np.asarray(f.at(0.5 * (pts[:-1] + pts[1:])))
    sign = 0.5 if side == LEFT else -0.5
    bracket_term = sign * np.concatenate(
        ([0.0], np.cumsum(phi.second(mids) * np.diff(bracket.continuous_part)))
    )
    jump_minus = np.zeros_like(v)
    jump_plus = np.zeros_like(v)
    dm = f.delta_minus
    dp = f.delta_plus
    im = np.flatnonzero(dm)
    ip = np.flatnonzero(dp)
    if side == LEFT:
        jump_minus[im] = phi.value(v[im]) - phi.value(left[im]) - phi.first(left[im]) * dm[im]
        jump_plus[ip] = phi.value(right[ip]) - phi.value(v[ip]) - phi.first(v[ip]) * dp[ip]
    else:
        jump_minus[im] = phi.value(v[im]) - phi.value(left[im]) - phi.first(v[im]) * dm[im]
        jump_plus[ip] = phi.value(right[ip]) - phi.value(v[ip]) - phi.first(right[ip]) * dp[ip]
    cum_minus = np.cumsum(jump_minus)
    cum_plus = np.concatenate(([0.0], np.cumsum(jump_plus)[:-1]))
    return integral, bracket_term, cum_minus, cum_plus


def chain_rule(phi: ScalarMap, f: SampledPath, lam: PartitionSequence, z: Optional[float] = None,
               y: Optional[float] = None, side: str = LEFT) -> ChainRuleReport:
    """Assemble phi(f(y)) - phi(f(z)) from the integral, bracket and jump terms.

    The left form adds half the integral of phi''(f) against the continuous
    bracket; the right form subtracts it and weights jumps by values and right
    limits instead of left limits and values.
    """
    _check_side(side)
    f = align(f, lam)
    z = lam.start if z is None else float(z)
    y = lam.T if y is None else float(y)
    if z > y:
        raise InvalidArgument(f"chain rule interval is reversed: z={z} > y={y}")
    iz = _grid_index(f.grid, z)
    iy = _grid_index(f.grid, y)
    bracket = quadratic_variation(f, lam)
    if not bracket.converged:
        logger.debug("bracket of f is not Cauchy in level; chain rule terms are finite-depth")
    _, bracket_cum, cum_minus, cum_plus = _chain_rule_terms(phi, f, bracket, side)
    integral = lambda_integral(f.map(phi.first), f, lam, side, z, y)
    lhs = float(phi.value(f.values[iy]) - phi.value(f.values[iz]))
    bracket_term = float(bracket_cum[iy] - bracket_cum[iz])
    jumps = (float(cum_minus[iy] - cum_minus[iz]), float(cum_plus[iy] - cum_plus[iz]))
    residual = lhs - (integral.value + bracket_term + jumps[0] + jumps[1])
    return ChainRuleReport(lhs, integral, bracket_term, jumps, residual, side)


def chain_rule_residual_path(phi: ScalarMap, f: SampledPath, lam: PartitionSequence,
                             side: str = LEFT) -> np.ndarray:
    """Chain-rule residual from the interval start to every grid time, finest level."""
    _check_side(side)
    f = align(f, lam)
    bracket = quadratic_variation(f, lam)
    integral, bracket_cum, cum_minus, cum_plus = _chain_rule_terms(phi, f, bracket, side)
    lhs = phi.value(f.values) - phi.value(f.values[0])
    return lhs - (integral + bracket_cum + cum_minus + cum_plus)


def improper_lc_tail(integrand: SampledPath, integrator: SampledPath, lam: PartitionSequence,
                     rtol: float = CAUCHY_RTOL) -> IntegralEstimate:
    """Left Cauchy integral over [start, u_m] as u_m increases to the end of the interval.

    u_m is the last interior point of level m (T - T*base**-m for dyadic
    sequences). The integrand's value at the end point never enters.
    """
    integrand = align(integrand, lam)
    integrator = align(integrator, lam)
    cumulative = indefinite_values(integrand, integrator, LEFT)
    per_level = []
    for m in range(1, lam.depth + 1):
        u_idx = int(lam.level_indices(m)[-2])
        per_level.append((m, float(cumulative[u_idx])))
    values = np.array([v for _, v in per_level])
    converged = cauchy_converged(values, rtol=rtol)
    if not converged:
        logger.info("improper Left Cauchy tail is not Cauchy over the last levels")
    u_last = float(lam.finest.points[lam.level_indices(lam.depth)[-2]])
    return IntegralEstimate(tuple(per_level), float(values[-1]), converged, LEFT,
                            (lam.start, u_last))
