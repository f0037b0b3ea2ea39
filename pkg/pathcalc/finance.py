"""Evolutionary asset pricing: Black-Scholes prices and pathwise hedging,
binomial prices on first-passage skeletons and the return/price duality."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import ndtr
from scipy.stats import norm

from pathcalc.config import BRACKET_RTOL
from pathcalc.errors import InvalidArgument, InvalidPrice, NotAnEvolution
from pathcalc.generators import Skeleton
from pathcalc.paths import CADLAG_STEP, Partition, PartitionSequence, SampledPath, align
from pathcalc.product import FORWARD, doleans, lambda_generator
from pathcalc.stieltjes import IntegralEstimate, LEFT, improper_lc_tail, indefinite_values
from pathcalc.variation import quadratic_variation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BsParams:
    K: float
    r: float
    sigma: float
    T: float

    def __post_init__(self):
        if not self.K > 0:
            raise InvalidArgument(f"strike must be positive, got {self.K}")
        if not self.r >= 0:
            raise InvalidArgument(f"rate must be nonnegative, got {self.r}")
        if not self.sigma > 0:
            raise InvalidArgument(f"volatility must be positive, got {self.sigma}")
        if not self.T > 0:
            raise InvalidArgument(f"horizon must be positive, got {self.T}")


def d1(params: BsParams, t, x):
    tau = params.T - np.asarray(t, dtype=float)
    return (np.log(np.asarray(x, dtype=float) / params.K)
            + (params.r + 0.5 * params.sigma ** 2) * tau) / (params.sigma * np.sqrt(tau))


def d2(params: BsParams, t, x):
    tau = params.T - np.asarray(t, dtype=float)
    return d1(params, t, x) - params.sigma * np.sqrt(tau)


def _broadcast(params: BsParams, t, x) -> Tuple[np.ndarray, np.ndarray]:
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    if np.any(t < 0) or np.any(t > params.T):
        raise InvalidArgument(f"t must lie in [0, {params.T}]")
    if np.any(x < 0):
        raise InvalidArgument("price must be nonnegative")
    return t, x


def bs_price(params: BsParams, t, x):
    """Call value: payoff at T, zero at x = 0, x N(d1) - K exp(-r(T-t)) N(d2) otherwise."""
    scalar = np.ndim(t) == 0 and np.ndim(x) == 0
    t, x = _broadcast(params, t, x)
    out = np.maximum(0.0, x - params.K)
    inner = (t < params.T) & (x > 0)
    out = np.where(x == 0, 0.0, out)
    if np.any(inner):
        ti = t[inner]
        xi = x[inner]
        out[inner] = (xi * ndtr(d1(params, ti, xi))
                      - params.K * np.exp(-params.r * (params.T - ti)) * ndtr(d2(params, ti, xi)))
    return float(out) if scalar else out


def bs_derivatives(params: BsParams, t, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form (phi_t, phi_x, phi_xx) for t < T and x > 0."""
    t, x = _broadcast(params, t, x)
    if np.any(t >= params.T) or np.any(x <= 0):
        raise InvalidArgument("derivatives need t < T and x > 0")
    tau = params.T - t
    a = d1(params, t, x)
    b = a - params.sigma * np.sqrt(tau)
    density = norm.pdf(a)
    phi_x = ndtr(a)
    phi_xx = density / (params.sigma * x * np.sqrt(tau))
    phi_t = (-params.sigma * x * density / (2.0 * np.sqrt(tau))
             - params.r * params.K * np.exp(-params.r * tau) * ndtr(b))
    return phi_t, phi_x, phi_xx


def bs_delta(params: BsParams, t, x):
    return bs_derivatives(params, t, x)[1]


def bs_pde_residual(params: BsParams, t, x):
    """phi_t + sigma**2 x**2 phi_xx / 2 + r x phi_x - r phi."""
    phi_t, phi_x, phi_xx = bs_derivatives(params, t, x)
    x = np.asarray(x, dtype=float)
    return (phi_t + 0.5 * params.sigma ** 2 * x ** 2 * phi_xx + params.r * x * phi_x
            - params.r * bs_price(params, t, x))


@dataclass(frozen=True, eq=False)
class HedgeReport:
    grid: Partition
    alpha: np.ndarray
    beta: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    V: np.ndarray
    G: np.ndarray
    residual: np.ndarray
    terminal_payoff_gap: float
    gain_tail: IntegralEstimate
    bracket_gap: float

    @property
    def sup_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def scale(self) -> float:
        """max(V(0), P(0)), the yardstick for residuals."""
        return float(max(self.V[0], self.P[0]))


def hedge(params: BsParams, P: SampledPath, lam: PartitionSequence,
          bracket_rtol: float = BRACKET_RTOL) -> HedgeReport:
    """Replicate the call along one continuous price path.

    beta = N(d1) before T and 0 at T; alpha = (V - beta P)/Q with Q = exp(rt).
    The gain is the bond integral of alpha against Q plus the Left Cauchy
    integral of beta against P.

    Raises:
        InvalidPrice: If P is not a positive continuous path from 1, or its
            bracket disagrees with sigma**2 times the integral of P**2.
    """
    P = align(P, lam)
    if not P.is_continuous:
        raise InvalidPrice("hedging needs a continuous price path")
    if np.any(P.values <= 0):
        raise InvalidPrice(f"price touches zero at t={P.grid.points[np.argmax(P.values <= 0)]}")
    if abs(P.values[0] - 1.0) > 1e-12:
        raise InvalidPrice(f"price must start at 1, got {P.values[0]}")
    if abs(lam.T - params.T) > 1e-12 * params.T:
        raise InvalidArgument(f"horizon {params.T} differs from the partition end {lam.T}")

    t = P.grid.points
    bracket = quadratic_variation(P, lam).final
    model = params.sigma ** 2 * trapezoid(P.values ** 2, t)
    bracket_gap = abs(bracket - model) / model
    if bracket_gap > bracket_rtol:
        raise InvalidPrice(
            f"price bracket {bracket:.6g} differs from sigma^2 * int P^2 = {model:.6g} "
            f"by {bracket_gap:.2%}"
        )

    inner = t < params.T
    beta = np.zeros_like(t)
    beta[inner] = bs_delta(params, t[inner], P.values[inner])
    Q = np.exp(params.r * t)
    V = np.asarray(bs_price(params, t, P.values))
    alpha = (V - beta * P.values) / Q

    dQ = np.diff(Q)
    weights = 0.5 * (alpha[:-1] + alpha[1:])
    weights[-1] = alpha[-2]
    bond = np.concatenate(([0.0], np.cumsum(weights * dQ)))
    beta_path = SampledPath(P.grid, beta)
    stock = indefinite_values(beta_path, P, LEFT)
    G = bond + stock
    residual = V - V[0] - G
    payoff_gap = abs(V[-1] - max(0.0, P.values[-1] - params.K))
    tail = improper_lc_tail(beta_path, P, lam)
    logger.info(
        f"Hedge K={params.K} r={params.r} sigma={params.sigma}: "
        f"sup residual {np.max(np.abs(residual)):.3e}, bracket gap {bracket_gap:.2%}"
    )
    return HedgeReport(P.grid, alpha, beta, Q, P.values, V, G, residual, payoff_gap, tail,
                       bracket_gap)


def binomial_price(skeleton: Union[Skeleton, Sequence[float]], m: Optional[int] = None,
                   T: Optional[float] = None) -> SampledPath:
    """P_m(k) = product over j <= k of (1 + W_m(j) - W_m(j-1)) at times k * 4**-m.

    Raises:
        InvalidArgument: If a walk increment is not +-2**-m.
    """
    if isinstance(skeleton, Skeleton):
        m = skeleton.m
        levels = skeleton.levels
    else:
        if m is None:
            raise InvalidArgument("m is required with raw walk values")
        levels = np.asarray(skeleton, dtype=float)
    h = 2.0 ** -m
    steps = np.diff(levels)
    if np.any(np.abs(np.abs(steps) - h) > 1e-12):
        raise InvalidArgument(f"walk increments must be +-2**-{m}")
    times = np.arange(levels.size) * 4.0 ** -m
    if T is not None:
        keep = times <= T
        times = times[keep]
        steps = steps[:times.size - 1]
    if times.size < 2:
        raise InvalidArgument("the walk needs at least one step")
    values = np.concatenate(([1.0], np.cumprod(1.0 + steps)))
    return SampledPath(Partition(times), values, CADLAG_STEP)


@dataclass(frozen=True)
class BinomialGap:
    m: int
    calendar_gap: float
    coupled_gap: float
    steps: int


def binomial_gap(skeleton: Skeleton, B: SampledPath, T: float = 1.0) -> BinomialGap:
    """Sup gaps between the binomial price and exp{B(t) - t/2} on [0, T].

    ``calendar_gap`` reads P_m on the calendar t = k 4**-m. ``coupled_gap``
    reads it on the passage clock: at a grid time t of B the price is the
    product of 1 + B(tau_k ^ t) - B(tau_{k-1} ^ t), i.e. P_m at the last
    passage before t times 1 + B(t) - W_m there.
    """
    P = binomial_price(skeleton, T=T)
    if P.grid.end < T - 4.0 ** -skeleton.m:
        logger.warning(f"skeleton covers only [0, {P.grid.end:.4f}] of [0, {T}]")
    t = P.grid.points
    calendar = np.exp(np.asarray(B.at(t)) - 0.5 * t)
    walk = np.concatenate(([1.0], np.cumprod(1.0 + np.diff(skeleton.levels))))
    keep = B.grid.points <= T * (1 + 1e-12)
    s = B.grid.points[keep]
    b = B.values[keep]
    last = np.searchsorted(skeleton.tau, s, side="right") - 1
    stopped = walk[last] * (1.0 + b - skeleton.levels[last])
    coupled = np.exp(b - 0.5 * s)
    return BinomialGap(skeleton.m, float(np.max(np.abs(P.values - calendar))),
                       float(np.max(np.abs(stopped - coupled))), t.size - 1)


@dataclass(frozen=True, eq=False)
class EvolutionarySystem:
    returns: Tuple[SampledPath, ...]
    prices: Tuple[SampledPath, ...]
    lam: PartitionSequence

    def __post_init__(self):
        if len(self.returns) != len(self.prices):
            raise InvalidArgument("every return needs exactly one price")
        for i, price in enumerate(self.prices):
            if abs(price.values[0] - 1.0) > 1e-12:
                raise NotAnEvolution(f"price {i} starts at {price.values[0]}, not 1")
            if np.any(price.values <= 0) or np.any(price.right_limits <= 0):
                raise NotAnEvolution(f"price {i} is not strictly positive")

    @classmethod
    def from_returns(cls, returns: Sequence[SampledPath],
                     lam: PartitionSequence) -> "EvolutionarySystem":
        """Prices as forward Doleans exponentials of the returns."""
        aligned = tuple(align(g, lam) for g in returns)
        prices = tuple(doleans(g, lam, FORWARD).path for g in aligned)
        return cls(aligned, prices, lam)


def reflexivity_check(system: EvolutionarySystem) -> List[Tuple[float, float]]:
    """(sup |f - 1 - LC int f dg|, sup |L f - (g - g(0))|) for every (return, price) pair."""
    gaps = []
    for g, f in zip(system.returns, system.prices):
        g = align(g, system.lam)
        f = align(f, system.lam)
        equation = f.values - 1.0 - indefinite_values(f, g, LEFT)
        generator = lambda_generator(f, system.lam).values - (g.values - g.values[0])
        gaps.append((float(np.max(np.abs(equation))), float(np.max(np.abs(generator)))))
    return gaps
