"""Partitions, nested partition sequences and sampled regulated paths.

Every other module consumes these types. A path lives on the finest grid of a
``PartitionSequence``; its one-sided limits at grid points are kept as arrays
so that jump sums and limit-weighted integrals never need to re-derive them.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from pathcalc.errors import AccessibilityViolation, InvalidArgument

logger = logging.getLogger(__name__)

CONTINUOUS = "continuous"
CADLAG_STEP = "cadlag-step"
STYLES = (CONTINUOUS, CADLAG_STEP)

DYADIC_BASE_2 = "dyadic-base-2"
DYADIC_BASE_R = "dyadic-base-r"
EXPLICIT = "explicit"

# Largest finest grid a dyadic sequence may allocate.
MAX_GRID_POINTS = 2 ** 26 + 1


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Partition:
    """A strictly increasing finite set of times; a single point is the degenerate partition."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size == 0:
            raise InvalidArgument("a partition needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("partition points must be finite")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise InvalidArgument("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def start(self) -> float:
        return float(self.points[0])

    @property
    def end(self) -> float:
        return float(self.points[-1])

    @property
    def n(self) -> int:
        """Number of intervals."""
        return self.points.size - 1

    @property
    def is_degenerate(self) -> bool:
        return self.points.size == 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points))) if self.n else 0.0

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Partition) and np.array_equal(self.points, other.points)

    __hash__ = None

    def contains(self, times: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
        """Exact membership of each time in the partition."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.clip(np.searchsorted(self.points, t), 0, self.points.size - 1)
        return self.points[idx] == t


def trace_partition(kappa: Partition, s: float, t: float) -> Partition:
    """Trace of a partition on [s, t]: {s} together with the points of kappa inside (s, t), and {t}.

    Args:
        kappa: The partition being traced.
        s: Left end of the trace interval.
        t: Right end of the trace interval.

    Returns:
        The trace partition; the one-point partition {s} when s == t.

    Raises:
        InvalidArgument: If s > t or either end lies outside kappa's interval.
    """
    s = float(s)
    t = float(t)
    if s > t:
        raise InvalidArgument(f"trace interval is reversed: s={s} > t={t}")
    if s < kappa.start or t > kappa.end:
        raise InvalidArgument(
            f"trace interval [{s}, {t}] leaves [{kappa.start}, {kappa.end}]"
        )
    if s == t:
        return Partition([s])
    pts = kappa.points
    inner = pts[(pts > s) & (pts < t)]
    return Partition(np.concatenate(([s], inner, [t])))


@dataclass(frozen=True, eq=False)
class PartitionSequence:
    """Nested partitions lambda_1, ..., lambda_depth of one interval.

    ``indices[m - 1]`` holds the positions of level m inside the finest level,
    which is what the level sums in the other modules index with.
    """

    levels: Tuple[Partition, ...]
    kind: str = EXPLICIT
    base: Optional[int] = None
    indices: Tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.levels:
            raise InvalidArgument("a partition sequence needs at least one level")
        if self.kind not in (DYADIC_BASE_2, DYADIC_BASE_R, EXPLICIT):
            raise InvalidArgument(f"unknown partition sequence kind: {self.kind}")
        first = self.levels[0]
        for coarse, fine in zip(self.levels, self.levels[1:]):
            if coarse.start != fine.start or coarse.end != fine.end:
                raise InvalidArgument("all levels must share the same interval")
            if not np.all(fine.contains(coarse.points)):
                raise InvalidArgument("partition sequence is not nested")
        if first.is_degenerate:
            raise InvalidArgument("levels must be nondegenerate partitions")
        if not self.indices:
            finest = self.levels[-1].points
            idx = []
            for level in self.levels:
                pos = np.searchsorted(finest, level.points)
                pos.setflags(write=False)
                idx.append(pos)
            object.__setattr__(self, "indices", tuple(idx))

    @classmethod
    def explicit(cls, levels: Sequence[Sequence[float]]) -> "PartitionSequence":
        """Build a sequence from explicit point lists, checking nestedness."""
        return cls(levels=tuple(Partition(lv) for lv in levels), kind=EXPLICIT)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> Partition:
        return self.levels[-1]

    @property
    def start(self) -> float:
        return self.finest.start

    @property
    def T(self) -> float:
        return self.finest.end

    def level(self, m: int) -> Partition:
        """Level m, counted from 1."""
        if not 1 <= m <= self.depth:
            raise InvalidArgument(f"level {m} outside 1..{self.depth}")
        return self.levels[m - 1]

    def level_indices(self, m: int) -> np.ndarray:
        self.level(m)
        return self.indices[m - 1]

    def mesh(self, m: int) -> float:
        return self.level(m).mesh

    def counts(self) -> np.ndarray:
        """N_m, the number of intervals at each level."""
        return np.array([lv.n for lv in self.levels], dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == EXPLICIT:
            return {"levels": [lv.points.tolist() for lv in self.levels]}
        return {"T": self.T, "base": self.base, "depth": self.depth}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, descriptor: Union[str, Dict[str, Any]]) -> "PartitionSequence":
        """Rebuild a sequence from its JSON descriptor."""
        data = json.loads(descriptor) if isinstance(descriptor, str) else descriptor
        if "levels" in data:
            return cls.explicit(data["levels"])
        try:
            return make_dyadic_sequence(float(data["T"]), int(data["base"]), int(data["depth"]))
        except KeyError as e:
            raise InvalidArgument(f"partition descriptor is missing {e}") from e


def make_dyadic_sequence(T: float, base: int, depth: int) -> PartitionSequence:
    """Levels lambda_m = {i*T/base**m : 0 <= i <= base**m} for m = 1..depth.

    Coarser levels are strided views of the finest grid, so nestedness holds
    bit-for-bit.
    """
    if not np.isfinite(T) or T <= 0:
        raise InvalidArgument(f"T must be positive, got {T}")
    if int(base) != base or base < 2:
        raise InvalidArgument(f"base must be an integer >= 2, got {base}")
    if int(depth) != depth or depth < 1:
        raise InvalidArgument(f"depth must be an integer >= 1, got {depth}")
    base = int(base)
    depth = int(depth)
    n_fine = base ** depth
    if n_fine + 1 > MAX_GRID_POINTS:
        raise InvalidArgument(f"base**depth = {n_fine} exceeds the grid size cap")
    finest = (np.arange(n_fine + 1) * float(T)) / n_fine
    levels = []
    indices = []
    for m in range(1, depth + 1):
        stride = base ** (depth - m)
        pos = np.arange(0, n_fine + 1, stride)
        pos.setflags(write=False)
        indices.append(pos)
        levels.append(Partition(finest[::stride]))
    kind = DYADIC_BASE_2 if base == 2 else DYADIC_BASE_R
    logger.debug(f"Built {kind} sequence: T={T}, depth={depth}, {n_fine + 1} finest points")
    return PartitionSequence(levels=tuple(levels), kind=kind, base=base, indices=tuple(indices))


@dataclass(frozen=True)
class Decoration:
    """Left and right limits attached to a grid time."""

    time: float
    left: float
    right: float


@dataclass(frozen=True)
class JumpEntry:
    time: float
    minus: float
    plus: float


@dataclass(frozen=True)
class JumpSet:
    """Times with a nonzero left or right jump, in time order."""

    entries: Tuple[JumpEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[JumpEntry]:
        return iter(self.entries)

    @property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.entries], dtype=float)

    @property
    def minus(self) -> np.ndarray:
        return np.array([e.minus for e in self.entries], dtype=float)

    @property
    def plus(self) -> np.ndarray:
        return np.array([e.plus for e in self.entries], dtype=float)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """A regulated function known on a grid, with optional jump decorations.

    Between grid points the path is the linear interpolant (``continuous``) or
    the right limit at the previous grid point (``cadlag-step``). For the step
    style the left limit at a grid point is the right limit at the previous one;
    a decoration may only add a right limit that differs from the value.
    """

    grid: Partition
    values: np.ndarray
    style: str = CONTINUOUS
    jumps: Tuple[Decoration, ...] = ()
    left_limits: np.ndarray = field(init=False, repr=False)
    right_limits: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.grid, Partition):
            object.__setattr__(self, "grid", Partition(self.grid))
        values = _frozen(self.values)
        if values.shape != self.grid.points.shape:
            raise InvalidArgument(
                f"{values.size} values for a grid of {self.grid.points.size} points"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("path values must be finite")
        if self.style not in STYLES:
            raise InvalidArgument(f"unknown interpolation style: {self.style}")
        object.__setattr__(self, "values", values)
        jumps = tuple(
            d if isinstance(d, Decoration) else Decoration(*map(float, d)) for d in self.jumps
        )
        object.__setattr__(self, "jumps", jumps)

        if self.style == CONTINUOUS:
            if jumps:
                raise InvalidArgument("a continuous interpolant carries no jump decorations")
            object.__setattr__(self, "left_limits", values)
            object.__setattr__(self, "right_limits", values)
            return

        pts = self.grid.points
        right = values.copy()
        seen = set()
        for d in jumps:
            i = int(np.searchsorted(pts, d.time))
            if i >= pts.size or pts[i] != d.time:
                raise AccessibilityViolation(f"decorated jump at t={d.time} is not a grid point")
            if i in seen:
                raise InvalidArgument(f"two decorations at t={d.time}")
            seen.add(i)
            if not (np.isfinite(d.left) and np.isfinite(d.right)):
                raise InvalidArgument(f"decoration at t={d.time} has a non-finite limit")
            if i == pts.size - 1 and d.right != values[i]:
                raise InvalidArgument("the right limit at the interval end must equal the value")
            right[i] = d.right
        left = np.empty_like(values)
        left[0] = values[0]
        left[1:] = right[:-1]
        for d in jumps:
            i = int(np.searchsorted(pts, d.time))
            if not np.isclose(d.left, left[i], rtol=1e-12, atol=1e-15):
                raise InvalidArgument(
                    f"decoration at t={d.time}: left limit {d.left} disagrees with "
                    f"the carried value {left[i]}"
                )
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left_limits", left)
        object.__setattr__(self, "right_limits", right)

    @classmethod
    def from_limits(cls, grid: Partition, values: np.ndarray, right: np.ndarray,
                    style: str) -> "SampledPath":
        """Build a path from values and right limits, decorating where they differ."""
        if style == CONTINUOUS:
            return cls(grid, values, CONTINUOUS)
        values = np.asarray(values, dtype=float)
        right = np.asarray(right, dtype=float)
        pts = grid.points if isinstance(grid, Partition) else np.asarray(grid, dtype=float)
        decorations = []
        for i in np.flatnonzero(right != values):
            left = values[0] if i == 0 else right[i - 1]
            decorations.append(Decoration(float(pts[i]), float(left), float(right[i])))
        return cls(grid, values, CADLAG_STEP, tuple(decorations))

    @property
    def T(self) -> float:
        return self.grid.end

    @property
    def delta_minus(self) -> np.ndarray:
        """Left jumps f(t) - f(t-) at grid points; zero at the interval start."""
        return self.values - self.left_limits

    @property
    def delta_plus(self) -> np.ndarray:
        """Right jumps f(t+) - f(t) at grid points; zero at the interval end."""
        return self.right_limits - self.values

    @property
    def is_continuous(self) -> bool:
        return not np.any(self.delta_minus) and not np.any(self.delta_plus)

    def _locate(self, t: np.ndarray) -> np.ndarray:
        if np.any(t < self.grid.start) or np.any(t > self.grid.end):
            raise InvalidArgument(
                f"evaluation time outside [{self.grid.start}, {self.grid.end}]"
            )
        return np.clip(np.searchsorted(self.grid.points, t, side="right") - 1, 0, self.grid.n)

    def at(self, times: Union[float, Sequence[float], np.ndarray]) -> Union[float, np.ndarray]:
        """Evaluate the path; scalars in, scalar out."""
        scalar = np.ndim(times) == 0
        t = np.atleast_1d(np.asarray(times, dtype=float))
        if self.style == CONTINUOUS:
            self._locate(t)
            out = np.interp(t, self.grid.points, self.values)
        else:
            idx = self._locate(t)
            on_grid = self.grid.points[idx] == t
            out = np.where(on_grid, self.values[idx], self.right_limits[idx])
        return float(out[0]) if scalar else out

    def left_limit(self, times: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """f(t-), with f(a-) := f(a)."""
        scalar = np.ndim(times) == 0
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = self._locate(t)
        on_grid = self.grid.points[idx] == t
        out = np.where(on_grid, self.left_limits[idx], self.at(t))
        return float(out[0]) if scalar else out

    def right_limit(self, times: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """f(t+), with f(b+) := f(b)."""
        scalar = np.ndim(times) == 0
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = self._locate(t)
        on_grid = self.grid.points[idx] == t
        out = np.where(on_grid, self.right_limits[idx], self.at(t))
        return float(out[0]) if scalar else out

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "SampledPath":
        """Compose a vectorized scalar function with the path (values and limits)."""
        values = np.asarray(fn(self.values), dtype=float)
        right = np.asarray(fn(self.right_limits), dtype=float)
        return SampledPath.from_limits(self.grid, values, right, self.style)

    def restrict(self, kappa: Partition) -> "SampledPath":
        """Sample the path on kappa, carrying one-sided limits at kappa's points.

        Raises:
            InvalidArgument: If kappa leaves the path's interval.
            AccessibilityViolation: If a jump of the path is not a point of kappa.
        """
        if kappa == self.grid:
            return self
        if kappa.start < self.grid.start or kappa.end > self.grid.end:
            raise InvalidArgument(
                f"partition interval [{kappa.start}, {kappa.end}] is not inside the path's "
                f"[{self.grid.start}, {self.grid.end}]"
            )
        jumps = jump_set(self)
        if len(jumps):
            inside = (jumps.times >= kappa.start) & (jumps.times <= kappa.end)
            off = inside & ~kappa.contains(jumps.times)
            if np.any(off):
                raise AccessibilityViolation(
                    f"jump at t={jumps.times[off][0]} is not a point of the partition"
                )
        pts = kappa.points
        values = np.asarray(self.at(pts))
        if self.style == CONTINUOUS:
            return SampledPath(kappa, values)
        right = np.asarray(self.right_limit(pts))
        right[-1] = values[-1]
        return SampledPath.from_limits(kappa, values, right, CADLAG_STEP)

    def _combine(self, other: Any, op: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "SampledPath":
        if isinstance(other, SampledPath):
            if not self.grid == other.grid:
                raise InvalidArgument("paths live on different grids")
            style = CONTINUOUS if (self.style == CONTINUOUS and other.style == CONTINUOUS) \
                else CADLAG_STEP
            values = op(self.values, other.values)
            if self.style == other.style:
                right = op(self.right_limits, other.right_limits)
            else:
                # a continuous operand is read as a step path: values only
                right = values
            return SampledPath.from_limits(self.grid, values, right, style)
        c = float(other)
        return SampledPath.from_limits(
            self.grid, op(self.values, c), op(self.right_limits, c), self.style
        )

    def __add__(self, other: Any) -> "SampledPath":
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "SampledPath":
        return self._combine(other, np.subtract)

    def __rsub__(self, other: Any) -> "SampledPath":
        return (-self) + other

    def __mul__(self, other: Any) -> "SampledPath":
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self) -> "SampledPath":
        return self * -1.0


def jump_set(f: SampledPath) -> JumpSet:
    """All grid times where the path has a nonzero left or right jump."""
    dm = f.delta_minus
    dp = f.delta_plus
    idx = np.flatnonzero((dm != 0) | (dp != 0))
    pts = f.grid.points
    return JumpSet(tuple(JumpEntry(float(pts[i]), float(dm[i]), float(dp[i])) for i in idx))


def constant_path(grid: Union[Partition, np.ndarray], value: float = 0.0) -> SampledPath:
    grid = grid if isinstance(grid, Partition) else Partition(grid)
    return SampledPath(grid, np.full(grid.points.size, float(value)))


def align(f: SampledPath, lam: PartitionSequence) -> SampledPath:
    """Return f on lam's finest grid.

    Raises:
        AccessibilityViolation: If a jump of f is not a point of the finest level.
        InvalidArgument: If the finest level leaves f's interval.
    """
    return f.restrict(lam.finest)


def cumulative_trace_sums(a: np.ndarray, b: np.ndarray, idx: np.ndarray, mode: str) -> np.ndarray:
    """Partition sums over the trace of one level on [x_0, t_i], for every grid index i.

    ``a`` and ``b`` are values on the finest grid and ``idx`` the positions of
    the level inside it. With x_j the level points below t_i followed by t_i:

    - ``cross``: sum (a(x_j) - a(x_{j-1})) (b(x_j) - b(x_{j-1}))
    - ``left``:  sum a(x_{j-1}) (b(x_j) - b(x_{j-1}))
    - ``right``: sum a(x_j) (b(x_j) - b(x_{j-1}))

    Summation runs left to right within the level.
    """
    la = a[idx]
    lb = b[idx]
    db = np.diff(lb)
    if mode == "cross":
        terms = np.diff(la) * db
    elif mode == "left":
        terms = la[:-1] * db
    elif mode == "right":
        terms = la[1:] * db
    else:
        raise InvalidArgument(f"unknown sum mode: {mode}")
    cum = np.concatenate(([0.0], np.cumsum(terms)))
    k = np.searchsorted(idx, np.arange(a.size), side="right") - 1
    p = idx[k]
    tail_b = b - b[p]
    if mode == "cross":
        tail = (a - a[p]) * tail_b
    elif mode == "left":
        tail = a[p] * tail_b
    else:
        tail = a * tail_b
    return cum[k] + tail


def per_level_trace_sums(a: np.ndarray, b: np.ndarray, lam: PartitionSequence,
                         mode: str) -> np.ndarray:
    """``cumulative_trace_sums`` for every level, shape (depth, grid size)."""
    return np.vstack([
        cumulative_trace_sums(a, b, lam.level_indices(m), mode) for m in range(1, lam.depth + 1)
    ])
