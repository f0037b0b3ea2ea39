"""Partition products, product lambda-integrals, Doleans exponentials and the
evolution lambda-generator."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from pathcalc.config import CAUCHY_RTOL
from pathcalc.errors import DegenerateProduct, InvalidArgument, NotAnEvolution
from pathcalc.paths import (
    Partition, PartitionSequence, SampledPath, align, trace_partition,
)
from pathcalc.stieltjes import LEFT, indefinite_values, ly_integral_bv
from pathcalc.variation import BracketResult, cauchy_converged, quadratic_variation

logger = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"

# |U0| below this counts as touching zero.
EVOLUTION_FLOOR = 1e-12


def _product(factors: np.ndarray) -> float:
    if factors.size == 0:
        return 1.0
    if np.all(factors > 0):
        return float(np.exp(np.sum(np.log(factors))))
    return float(np.prod(factors))


def _cumulative_product(factors: np.ndarray) -> np.ndarray:
    if np.all(factors > 0):
        return np.exp(np.cumsum(np.log(factors)))
    return np.cumprod(factors)


def partition_product(f: SampledPath, kappa: Partition) -> float:
    """P(f; kappa), the product of (1 + increment) over kappa."""
    values = np.asarray(f.at(kappa.points))
    return _product(1.0 + np.diff(values))


@dataclass(frozen=True)
class ProductEstimate:
    per_level: Tuple[Tuple[int, float], ...]
    value: float
    converged: bool
    interval: Tuple[float, float]


def _check_nondegenerate(f: SampledPath) -> None:
    pts = f.grid.points
    for name, delta in (("left", f.delta_minus), ("right", f.delta_plus)):
        bad = np.flatnonzero(1.0 + delta == 0.0)
        if bad.size:
            raise DegenerateProduct(f"{name} jump of exactly -1 at t={pts[bad[0]]}")


def product_lambda_integral(f: SampledPath, lam: PartitionSequence, s: Optional[float] = None,
                            t: Optional[float] = None,
                            rtol: float = CAUCHY_RTOL) -> ProductEstimate:
    """Per-level partition products over the traces of [s, t].

    Raises:
        DegenerateProduct: If 1 + a jump of f vanishes.
    """
    f = align(f, lam)
    _check_nondegenerate(f)
    s = lam.start if s is None else float(s)
    t = lam.T if t is None else float(t)
    per_level = []
    for m in range(1, lam.depth + 1):
        per_level.append((m, partition_product(f, trace_partition(lam.level(m), s, t))))
    values = np.array([v for _, v in per_level])
    if not np.all(np.isfinite(values)):
        raise DegenerateProduct("a partition product overflowed")
    return ProductEstimate(tuple(per_level), float(values[-1]),
                           cauchy_converged(values, rtol=rtol), (s, t))


def _jump_factors(f: SampledPath) -> Tuple[np.ndarray, np.ndarray]:
    dm = f.delta_minus
    dp = f.delta_plus
    return (1.0 + dm) * np.exp(-dm), (1.0 + dp) * np.exp(-dp)


def jump_product(f: SampledPath, s: Optional[float] = None, t: Optional[float] = None) -> float:
    """Product of (1 + jump) exp(-jump) over left jumps in (s, t] and right jumps in [s, t)."""
    pts = f.grid.points
    s = f.grid.start if s is None else float(s)
    t = f.grid.end if t is None else float(t)
    if s > t:
        raise InvalidArgument(f"interval is reversed: s={s} > t={t}")
    gm, gp = _jump_factors(f)
    minus = gm[(pts > s) & (pts <= t)]
    plus = gp[(pts >= s) & (pts < t)]
    return float(np.prod(minus) * np.prod(plus))


@dataclass(frozen=True, eq=False)
class DoleansPath:
    base: SampledPath
    direction: str
    values: np.ndarray
    jump_product_part: np.ndarray
    right_limits: np.ndarray
    bracket_converged: bool

    @property
    def grid(self) -> Partition:
        return self.base.grid

    @property
    def path(self) -> SampledPath:
        return SampledPath.from_limits(self.grid, self.values, self.right_limits, self.base.style)


def doleans(f: SampledPath, lam: PartitionSequence, direction: str = FORWARD,
            bracket: Optional[BracketResult] = None) -> DoleansPath:
    """Forward or backward Doleans exponential of f on the finest grid.

    Forward: exp{f(t) - f(0) - [f]^c(t)/2} times the jump product over [0, t].
    Backward: exp{f(T) - f(x) - ([f]^c(T) - [f]^c(x))/2} times the jump
    product over [x, T].
    """
    if direction not in (FORWARD, BACKWARD):
        raise InvalidArgument(f"direction must be forward or backward, got {direction}")
    f = align(f, lam)
    if bracket is None:
        bracket = quadratic_variation(f, lam)
    if not bracket.converged:
        logger.debug("bracket of the exponent is not Cauchy in level")
    v = f.values
    c = bracket.continuous_part
    dp = f.delta_plus
    gm, gp = _jump_factors(f)

    if direction == FORWARD:
        # gamma over (0, t_i] for left jumps and [0, t_i) for right jumps
        gm_run = np.cumprod(np.concatenate(([1.0], gm[1:])))
        gp_run = np.concatenate(([1.0], np.cumprod(gp[:-1])))
        gamma = gm_run * gp_run
        values = np.exp(v - v[0] - 0.5 * c) * gamma
        right = values * (1.0 + dp)
    else:
        n = v.size
        # gamma over (x_i, T] for left jumps and [x_i, T) for right jumps
        gm_suffix = np.concatenate((np.cumprod(gm[::-1])[::-1][1:], [1.0]))
        gp_incl = np.cumprod(gp[:-1][::-1])[::-1]
        gp_suffix = np.concatenate((gp_incl, [1.0]))
        gp_strict = np.concatenate((gp_incl[1:], [1.0, 1.0]))[:n]
        gamma = gm_suffix * gp_suffix
        exp_part = v[-1] - v - 0.5 * (c[-1] - c)
        values = np.exp(exp_part) * gamma
        right = np.exp(exp_part - dp) * gm_suffix * gp_strict
    if np.any(1.0 + f.delta_minus <= 0) or np.any(1.0 + dp <= 0):
        logger.info("a jump factor 1 + jump is not positive; the exponential changes sign or vanishes")
    return DoleansPath(f, direction, values, gamma, right, bracket.converged)


@dataclass(frozen=True, eq=False)
class ResidualReport:
    grid: Partition
    residual: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.residual)))


def linear_equation_residual(f: SampledPath, lam: PartitionSequence) -> ResidualReport:
    """E(t) - 1 - (LC) integral of E against f, forward exponential, finest level."""
    f = align(f, lam)
    E = doleans(f, lam, FORWARD).path
    integral = indefinite_values(E, f, LEFT)
    return ResidualReport(f.grid, E.values - 1.0 - integral)


@dataclass(frozen=True, eq=False)
class GeneratorPath:
    grid: Partition
    values: np.ndarray
    source: SampledPath
    evolution_sums: Tuple[Tuple[int, float], ...]

    @property
    def path(self) -> SampledPath:
        return SampledPath.from_limits(self.grid, self.values, self.values, self.source.style)


def _check_evolution(U0: SampledPath) -> None:
    if abs(U0.values[0] - 1.0) > 1e-12:
        raise NotAnEvolution(f"U0(0) must be 1, got {U0.values[0]}")
    floor = min(np.min(np.abs(U0.values)), np.min(np.abs(U0.left_limits)),
                np.min(np.abs(U0.right_limits)))
    if floor <= EVOLUTION_FLOOR:
        raise NotAnEvolution(f"|U0| comes within {floor:.3e} of zero")


def lambda_generator(U0: SampledPath, lam: PartitionSequence) -> GeneratorPath:
    """L U0 = (LC) integral of 1/U0 against U0, with the raw evolution sums per level.

    Raises:
        NotAnEvolution: If U0(0) != 1 or |U0| is not bounded away from 0.
    """
    U0 = align(U0, lam)
    _check_evolution(U0)
    values = indefinite_values(U0.map(np.reciprocal), U0, LEFT)
    sums = []
    for m in range(1, lam.depth + 1):
        u = U0.values[lam.level_indices(m)]
        sums.append((m, float(np.sum(u[1:] / u[:-1] - 1.0))))
    return GeneratorPath(U0.grid, values, U0, tuple(sums))


@dataclass(frozen=True)
class DualityReport:
    generator_gap: float
    ratio_gap: float


def duality_roundtrip(g: SampledPath, lam: PartitionSequence,
                      f: Optional[SampledPath] = None) -> DualityReport:
    """Round trips between returns and prices.

    ``generator_gap`` is sup |L(E(g)) - (g - g(0))|; ``ratio_gap`` is the sup
    gap between the product integral of L(f) over [0, t] and f(t)/f(0), with f
    defaulting to E(g).
    """
    g = align(g, lam)
    E = doleans(g, lam, FORWARD).path
    L = lambda_generator(E, lam)
    generator_gap = float(np.max(np.abs(L.values - (g.values - g.values[0]))))
    if f is None:
        f = E
    else:
        f = align(f, lam)
        f = f * (1.0 / f.values[0])
    Lf = lambda_generator(f, lam)
    factors = 1.0 + np.diff(Lf.values)
    if np.any(factors == 0.0):
        raise DegenerateProduct("generator increment of exactly -1")
    ratio = np.concatenate(([1.0], _cumulative_product(factors)))
    ratio_gap = float(np.max(np.abs(ratio - f.values / f.values[0])))
    logger.debug(f"duality gaps: generator {generator_gap:.3e}, ratio {ratio_gap:.3e}")
    return DualityReport(generator_gap, ratio_gap)


def doleans_bracket_gap(f: SampledPath, lam: PartitionSequence) -> Tuple[float, float, float]:
    """|[E]_lambda(T) - (LY) integral of E**2 against [f]_lambda| with both sides."""
    f = align(f, lam)
    bracket = quadratic_variation(f, lam)
    E = doleans(f, lam, FORWARD, bracket=bracket).path
    lhs = quadratic_variation(E, lam).final
    rhs = ly_integral_bv(E.map(np.square), bracket)
    return abs(lhs - rhs), lhs, rhs
