"""Constructive path generators.

Random paths come from a seeded Philox generator (counter-based, so a seed
fixes the stream on every platform). Deterministic constructions: Kono
self-affine functions and pure-jump step paths.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from pathcalc.config import (
    BRIDGE_REFINEMENTS, BRIDGE_TOL, BROWNIAN_MAX_DEPTH, FBM_JITTER, FBM_MAX_N, PATHCALC_THREADS,
    SKELETON_BRIDGE_MARGIN, SKELETON_LINEAR_MARGIN,
)
from pathcalc.errors import AccessibilityViolation, InvalidArgument, InvalidSpec, NumericError
from pathcalc.paths import CADLAG_STEP, CONTINUOUS, Partition, PartitionSequence, SampledPath

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "philox-4x64"


@dataclass(frozen=True)
class Seeded:
    """A seed for the fixed counter-based generator."""

    seed: int
    algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.algorithm != RNG_ALGORITHM:
            raise InvalidArgument(f"unsupported generator: {self.algorithm}")

    def generator(self, stream: int = 0) -> np.random.Generator:
        """Stream 0 drives the paths; other streams are jumped 2**128 draws ahead."""
        bits = np.random.Philox(int(self.seed))
        if stream:
            bits = bits.jumped(int(stream))
        return np.random.Generator(bits)


def _uniform_grid(T: float, n: int) -> np.ndarray:
    return (np.arange(n + 1) * float(T)) / n


def brownian_dyadic(T: float, depth: int, seed: int) -> Tuple[SampledPath, List[np.ndarray]]:
    """Brownian path on the base-2 grid of [0, T] by Levy midpoint refinement.

    Level m is drawn from level m - 1 with one block of normals per level, so
    the coarse levels do not depend on the requested depth.

    Returns:
        The path on the finest grid and the refinement tower (levels 0..depth).
    """
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgument(f"T must be positive, got {T}")
    if int(depth) != depth or not 1 <= depth <= BROWNIAN_MAX_DEPTH:
        raise InvalidArgument(f"depth must be in 1..{BROWNIAN_MAX_DEPTH}, got {depth}")
    rng = Seeded(seed).generator()
    values = np.array([0.0, np.sqrt(T) * rng.standard_normal()])
    tower = [values]
    for m in range(1, int(depth) + 1):
        std = np.sqrt(T / 2.0 ** (m + 1))
        mids = 0.5 * (values[:-1] + values[1:]) + std * rng.standard_normal(values.size - 1)
        refined = np.empty(2 * values.size - 1)
        refined[0::2] = values
        refined[1::2] = mids
        values = refined
        tower.append(values)
    path = SampledPath(Partition(_uniform_grid(T, 2 ** int(depth))), values)
    return path, tower


@lru_cache(maxsize=8)
def _fbm_factor(H: float, N: int, T: float) -> np.ndarray:
    t = _uniform_grid(T, N)[1:]
    p = t ** (2 * H)
    cov = np.abs(np.subtract.outer(t, t)) ** (2 * H)
    cov *= -1.0
    cov += p[:, None]
    cov += p[None, :]
    cov *= 0.5
    cov[np.diag_indices_from(cov)] += FBM_JITTER
    try:
        factor = cholesky(cov, lower=True)
    except LinAlgError as e:
        raise NumericError(f"Cholesky factorization failed for H={H}, N={N}: {e}") from e
    factor.setflags(write=False)
    logger.debug(f"Factorized fBm covariance: H={H}, N={N}, T={T}")
    return factor


def fbm_cholesky(H: float, N: int, T: float, seed: int) -> SampledPath:
    """Fractional Brownian motion on the uniform N-grid of [0, T] with exact covariance."""
    if not 0 < H < 1:
        raise InvalidArgument(f"H must lie in (0, 1), got {H}")
    if int(N) != N or not 1 <= N <= FBM_MAX_N:
        raise InvalidArgument(f"N must be in 1..{FBM_MAX_N}, got {N}")
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgument(f"T must be positive, got {T}")
    factor = _fbm_factor(float(H), int(N), float(T))
    z = Seeded(seed).generator().standard_normal(int(N))
    values = np.concatenate(([0.0], factor @ z))
    return SampledPath(Partition(_uniform_grid(T, int(N))), values)


@dataclass(frozen=True)
class KonoSpec:
    """A self-affine function: base r, scale H and signs x(0..r-1) summing to r**H."""

    base: int
    H: float
    x_seq: Tuple[int, ...]
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "x_seq", tuple(int(v) for v in self.x_seq))
        if int(self.base) != self.base or self.base < 4:
            raise InvalidSpec(f"base must be an integer >= 4, got {self.base}")
        if not 0 < self.H < 1:
            raise InvalidSpec(f"H must lie in (0, 1), got {self.H}")
        if len(self.x_seq) != self.base or any(v not in (1, -1) for v in self.x_seq):
            raise InvalidSpec(f"x_seq must hold {self.base} signs, got {self.x_seq}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise InvalidSpec(f"depth must be a positive integer, got {self.depth}")
        target = self.base ** self.H
        if abs(target - round(target)) > 1e-9 or sum(self.x_seq) != round(target):
            raise InvalidSpec(
                f"sum of x_seq is {sum(self.x_seq)}, must equal base**H = {target:.6g}"
            )


def kono_path(spec: KonoSpec, T: float = 1.0) -> SampledPath:
    """Self-affine function on the base-r grid of size r**depth + 1.

    At t = sum delta_n r**-n the value is sum y_{n-1} s(delta_n) r**(-nH) with
    s(j) = x(0) + ... + x(j-1) and y_n = x(delta_1)...x(delta_n); grid points
    have finite expansions, and w(1) = 1.
    """
    r = spec.base
    d = spec.depth
    if r ** d > 2 ** 26:
        raise InvalidArgument(f"base**depth = {r}**{d} exceeds the grid size cap")
    x = np.array(spec.x_seq, dtype=float)
    s = np.concatenate(([0.0], np.cumsum(x)[:-1]))
    scale = 1.0 / sum(spec.x_seq)
    i = np.arange(r ** d)
    w = np.zeros(i.size)
    y = np.ones(i.size)
    for n in range(1, d + 1):
        digit = (i // r ** (d - n)) % r
        w += y * s[digit] * scale ** n
        y *= x[digit]
    values = np.append(w, 1.0)
    return SampledPath(Partition(_uniform_grid(T, r ** d)), values)


def step_path(jumps: Sequence[Tuple[float, float]],
              grid: Union[Partition, PartitionSequence, np.ndarray],
              start: float = 0.0) -> SampledPath:
    """Cadlag pure-jump path starting at ``start`` and jumping by delta at each time.

    Raises:
        InvalidArgument: On duplicate times or a jump at the interval start.
        AccessibilityViolation: If a jump time is not a grid point.
    """
    if isinstance(grid, PartitionSequence):
        grid = grid.finest
    elif not isinstance(grid, Partition):
        grid = Partition(grid)
    pts = grid.points
    increments = np.zeros(pts.size)
    seen = set()
    for t, delta in jumps:
        t = float(t)
        if t in seen:
            raise InvalidArgument(f"duplicate jump time {t}")
        seen.add(t)
        i = int(np.searchsorted(pts, t))
        if i >= pts.size or pts[i] != t:
            raise AccessibilityViolation(f"jump time {t} is not a grid point")
        if i == 0:
            raise InvalidArgument("a left jump at the interval start is not defined")
        increments[i] = float(delta)
    return SampledPath(grid, float(start) + np.cumsum(increments), CADLAG_STEP)


@dataclass(frozen=True, eq=False)
class Skeleton:
    """First-passage skeleton of level m: tau[k] and W_m(k 4**-m) = levels[k]."""

    m: int
    tau: np.ndarray
    levels: np.ndarray
    exhausted: bool
    bridged: bool = False

    @property
    def steps(self) -> int:
        return self.tau.size - 1

    @property
    def calendar(self) -> np.ndarray:
        """The random-walk times k * 2**(-2m)."""
        return np.arange(self.tau.size) * 4.0 ** -self.m


def _bridge_exit(t0: float, a: float, t1: float, b: float, lower: float, upper: float,
                 rng: np.random.Generator, min_dt: float) -> Optional[Tuple[float, float]]:
    """First exit through lower/upper of the Brownian bridge from (t0, a) to (t1, b).

    The segment is halved with bridge midpoints until it is shorter than
    ``min_dt``; halves whose crossing probability is below BRIDGE_TOL are skipped.
    """
    dt = t1 - t0
    outside = b >= upper or b <= lower
    if not outside:
        p = (np.exp(-2.0 * (upper - a) * (upper - b) / dt)
             + np.exp(-2.0 * (a - lower) * (b - lower) / dt))
        if p < BRIDGE_TOL:
            return None
    if dt <= min_dt:
        if not outside:
            return None
        target = upper if b >= upper else lower
        return t0 + (target - a) / (b - a) * dt, target
    tm = t0 + 0.5 * dt
    vm = 0.5 * (a + b) + 0.5 * np.sqrt(dt) * rng.standard_normal()
    hit = _bridge_exit(t0, a, tm, vm, lower, upper, rng, min_dt)
    if hit is None:
        hit = _bridge_exit(tm, vm, t1, b, lower, upper, rng, min_dt)
    return hit


def _next_linear(pts: np.ndarray, vals: np.ndarray, j: int, start: Tuple[float, float],
                 level: float, h: float, chunk: int) -> Optional[Tuple[int, float, float]]:
    n = vals.size
    k = j
    while k < n:
        hit = np.flatnonzero(np.abs(vals[k:k + chunk] - level) >= h)
        if hit.size:
            found = k + int(hit[0])
            t0, v0 = start if found == j else (float(pts[found - 1]), float(vals[found - 1]))
            target = level + h if vals[found] > level else level - h
            theta = (target - v0) / (vals[found] - v0)
            return found, t0 + theta * (float(pts[found]) - t0), target
        k += chunk
    return None


def _next_bridged(pts: np.ndarray, vals: np.ndarray, j: int, start: Tuple[float, float],
                  level: float, h: float, chunk: int, rng: np.random.Generator,
                  min_dt: float) -> Optional[Tuple[int, float, float]]:
    n = vals.size
    lower, upper = level - h, level + h
    k = j
    while k < n:
        stop = min(k + chunk, n)
        ta = pts[k - 1:stop - 1].copy()
        a = vals[k - 1:stop - 1].copy()
        if k == j:
            ta[0], a[0] = start
        tb = pts[k:stop]
        b = vals[k:stop]
        dt = tb - ta
        live = dt > 0
        span = np.where(live, dt, 1.0)
        p = (np.exp(-2.0 * np.maximum(upper - a, 0.0) * np.maximum(upper - b, 0.0) / span)
             + np.exp(-2.0 * np.maximum(a - lower, 0.0) * np.maximum(b - lower, 0.0) / span))
        outside = (b >= upper) | (b <= lower)
        for s in np.flatnonzero(outside | (live & (p >= BRIDGE_TOL))):
            hit = _bridge_exit(float(ta[s]), float(a[s]), float(tb[s]), float(b[s]),
                               lower, upper, rng, min_dt)
            if hit is not None:
                return k + int(s), hit[0], hit[1]
        k = stop
    return None


def first_passage_skeleton(B: SampledPath, m: int, bridge_seed: Optional[int] = None,
                           chunk: Optional[int] = None) -> Skeleton:
    """Successive passage times of B through the bands +-2**-m around the last level.

    Without ``bridge_seed`` crossings are located on the linear interpolant,
    so one grid segment may hold several. Sampling only at grid points
    delays every exit, so the mesh must be at most 2**(-2m-8).

    With ``bridge_seed`` B is read as a Brownian path: segments that may
    cross a band edge are refined with seeded bridge midpoints and the
    crossing is located on the refinement, which needs a mesh of 2**(-2m-4).

    The skeleton stops when the path runs out.

    Raises:
        InvalidArgument: If B is not continuous or is sampled too coarsely.
    """
    if int(m) != m or m < 1:
        raise InvalidArgument(f"m must be a positive integer, got {m}")
    if B.style != CONTINUOUS:
        raise InvalidArgument("the skeleton needs a continuous path")
    margin = SKELETON_LINEAR_MARGIN if bridge_seed is None else SKELETON_BRIDGE_MARGIN
    resolution = 2.0 ** (-2 * m - margin)
    mesh = B.grid.mesh
    if mesh > resolution * (1 + 1e-12):
        raise InvalidArgument(
            f"path mesh {mesh:.3e} is coarser than the required {resolution:.3e}"
        )
    pts = B.grid.points
    vals = B.values
    h = 2.0 ** -m
    if chunk is None:
        chunk = max(64, int(h * h / mesh))
    rng = None if bridge_seed is None else Seeded(bridge_seed).generator(stream=1)
    min_dt = mesh * 2.0 ** -BRIDGE_REFINEMENTS
    taus = [float(pts[0])]
    levels = [float(vals[0])]
    level = float(vals[0])
    start = (float(pts[0]), float(vals[0]))
    j = 1
    while j < vals.size:
        if rng is None:
            hit = _next_linear(pts, vals, j, start, level, h, chunk)
        else:
            hit = _next_bridged(pts, vals, j, start, level, h, chunk, rng, min_dt)
        if hit is None:
            break
        j, tau, level = hit
        taus.append(float(tau))
        levels.append(level)
        start = (float(tau), level)
    exhausted = len(taus) == 1
    if exhausted:
        logger.warning(f"path exhausted before the first passage at level m={m}")
    return Skeleton(int(m), np.array(taus), np.array(levels), exhausted, rng is not None)


@dataclass(frozen=True)
class FourierPairSpec:
    n: int
    k_max: int
    seed: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidSpec(f"n must be an integer >= 2, got {self.n}")
        if int(self.k_max) != self.k_max or self.k_max < self.n:
            raise InvalidSpec(f"k_max must be an integer >= n, got {self.k_max}")


@dataclass(frozen=True)
class FourierPairSums:
    n: int
    G: float
    F: float
    Z_lc: float
    Z_rc: float
    exact_mean: float


def _fourier_draws(seed: int, k_max: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = Seeded(seed).generator()
    xi = rng.standard_normal(k_max)
    eta = rng.standard_normal(k_max)
    return xi, eta


def fourier_exact_mean(n: int, k_max: int) -> float:
    """E Z_n = n/(2 pi**2) * sum_{k <= k_max} sin(2 pi k/n) / k**2."""
    k = np.arange(1, k_max + 1)
    angle = 2.0 * np.pi * (k % n) / n
    return float(n / (2.0 * np.pi ** 2) * np.sum(np.sin(angle) / k.astype(float) ** 2))


def _pair_sums(xi: np.ndarray, eta: np.ndarray, n: int) -> Tuple[float, float]:
    """G_n and F_n from residue-class sums A_rho, B_rho of xi_k/k and eta_k/k."""
    k = np.arange(1, xi.size + 1)
    rho = k % n
    A = np.bincount(rho, weights=xi / k, minlength=n)
    B = np.bincount(rho, weights=eta / k, minlength=n)
    r = np.arange(n)
    neg = (-r) % n
    sin_w = np.sin(2.0 * np.pi * r / n)
    cos_w = 1.0 - np.cos(2.0 * np.pi * r / n)
    coef = n / (4.0 * np.pi ** 2)
    G = coef * np.sum((A ** 2 + B ** 2) * sin_w)
    F = coef * np.sum((A * B[neg] + B * A[neg]) * cos_w)
    return float(G), float(F)


def fourier_pair_sums(spec: FourierPairSpec) -> FourierPairSums:
    """Left and right Cauchy sums of the truncated conjugate Gaussian Fourier pair on the n-grid."""
    xi, eta = _fourier_draws(spec.seed, spec.k_max)
    G, F = _pair_sums(xi, eta, spec.n)
    return FourierPairSums(spec.n, G, F, G + F, G - F, fourier_exact_mean(spec.n, spec.k_max))


def fourier_pair_sums_direct(spec: FourierPairSpec) -> FourierPairSums:
    """Same sums by enumerating the index pairs: k = l mod n for G_n, k + l = 0 mod n for F_n."""
    xi, eta = _fourier_draws(spec.seed, spec.k_max)
    n = spec.n
    coef = n / (4.0 * np.pi ** 2)
    G = 0.0
    F = 0.0
    for k in range(1, spec.k_max + 1):
        same = np.arange((k - 1) % n + 1, spec.k_max + 1, n)
        opposite = np.arange((n - k % n) % n or n, spec.k_max + 1, n)
        w = np.sin(2.0 * np.pi * (k % n) / n)
        c = 1.0 - np.cos(2.0 * np.pi * (k % n) / n)
        G += coef * w * np.sum((xi[k - 1] * xi[same - 1] + eta[k - 1] * eta[same - 1]) / (k * same))
        F += coef * c * np.sum((xi[k - 1] * eta[opposite - 1] + eta[k - 1] * xi[opposite - 1])
                               / (k * opposite))
    return FourierPairSums(n, float(G), float(F), float(G + F), float(G - F),
                           fourier_exact_mean(n, spec.k_max))


def fourier_pair_paths(spec: FourierPairSpec) -> Tuple[SampledPath, SampledPath]:
    """The truncated pair (X, Y) on the grid {i/n}.

    X = sum (xi_k S_k - eta_k C_k) / (2 pi k), Y = sum (eta_k S_k + xi_k C_k) / (2 pi k)
    with S_k = sqrt(2) sin(2 pi k t) and C_k = sqrt(2) cos(2 pi k t).
    """
    xi, eta = _fourier_draws(spec.seed, spec.k_max)
    n = spec.n
    k = np.arange(1, spec.k_max + 1)
    i = np.arange(n + 1)
    angle = 2.0 * np.pi * (np.outer(i, k) % n) / n
    S = np.sqrt(2.0) * np.sin(angle)
    C = np.sqrt(2.0) * np.cos(angle)
    X = (S @ (xi / k) - C @ (eta / k)) / (2.0 * np.pi)
    Y = (S @ (eta / k) + C @ (xi / k)) / (2.0 * np.pi)
    grid = Partition(_uniform_grid(1.0, n))
    return SampledPath(grid, X), SampledPath(grid, Y)


@dataclass(frozen=True, eq=False)
class GrowthSummary:
    n_list: Tuple[int, ...]
    exact_means: np.ndarray
    lower_bounds: np.ndarray
    sample_means: np.ndarray
    sample_vars: np.ndarray
    slope: float
    samples: np.ndarray


def nonexistence_growth(n_list: Sequence[int], k_max: int, reps: int, seed: int = 0,
                        threads: Optional[int] = None) -> GrowthSummary:
    """Growth of Z_n = S_LC(Y, X; n-grid) in ln n, over ``reps`` seeds starting at ``seed``.

    Each replicate draws one pair and evaluates every n, so the columns of
    ``samples`` are coupled across n.
    """
    n_list = tuple(int(n) for n in n_list)
    if not n_list:
        raise InvalidArgument("n_list is empty")
    if reps < 2:
        raise InvalidArgument(f"reps must be at least 2, got {reps}")
    for n in n_list:
        FourierPairSpec(n, k_max, seed)

    def replicate(r: int) -> List[float]:
        xi, eta = _fourier_draws(seed + r, k_max)
        return [sum(_pair_sums(xi, eta, n)) for n in n_list]

    workers = PATHCALC_THREADS if threads is None else threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        samples = np.array(list(pool.map(replicate, range(reps))))
    ln_n = np.log(np.array(n_list, dtype=float))
    exact = np.array([fourier_exact_mean(n, k_max) for n in n_list])
    lower = (2.0 / np.pi ** 2) * (ln_n - 1.0)
    slope = float(np.polyfit(ln_n, exact, 1)[0]) if len(n_list) > 1 else float("nan")
    logger.info(f"Fourier pair growth over {reps} replicates: slope {slope:.4f}")
    return GrowthSummary(n_list, exact, lower, samples.mean(axis=0),
                         samples.var(axis=0, ddof=1), slope, samples)
