"""Last passage times over up-right lattice paths, with an exhaustive oracle.

The passage time from a start set S to a site p is the maximum over up-right
paths pi from S to p of the sum of weights over ``pi \\ S``: the start site
contributes nothing, every later site (including p) contributes its weight.
Unreachable sites carry a ``-inf`` sentinel.

Junction convention: because L_{A->B} excludes A's weight and includes B's,
concatenation is exactly superadditive, ``L_{A->C} >= L_{A->B} + L_{B->C}``
whenever B lies on some A->C path.  Tests rely on this convention.

The dynamic program fills the window in row-major order with
``T[i,j] = w[i,j] + max(T[i-1,j], T[i,j-1])`` and accumulates sums
left-associatively along paths, which is the same floating-point order the
brute-force enumerator uses; DP and oracle therefore agree bitwise, not just
within tolerance.  The inner sweep is jitted; the oracle is deliberately
plain recursive Python so the two routes share no code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple

import numpy as np
from numba import njit

from .lattice import Site, Window
from .weights import WeightSample

NEG_INF = float("-inf")

#: Largest path count brute_force_passage will enumerate.
BRUTE_FORCE_PATH_LIMIT = 10**6

FULL = "full"
UPPER = "upper"  # staircase labels k > 0
LOWER = "lower"  # staircase labels k <= 0


class InvalidConfigurationError(ValueError):
    """Particle positions not strictly decreasing in the label."""


class CoverageError(ValueError):
    """Weights do not cover the requested window."""


class UnreachableSiteError(ValueError):
    """Passage time requested at a site no start point can reach."""


class NoPathError(ValueError):
    """Backtracking requested from an unreachable endpoint."""


class TooManyPathsError(ValueError):
    """Brute-force enumeration refused; the window is too large."""


def is_unreachable(t: float) -> bool:
    return t == NEG_INF


@dataclass(frozen=True)
class StartSet:
    """Start points for a passage-time problem.

    ``points`` is the explicit site tuple; for staircases built from a
    particle configuration it is ``{(k + x_k(0), k)}`` filtered by ``half``
    and the truncation bound ``|k| <= K``.
    """

    points: Tuple[Site, ...]
    half: str = FULL
    truncation: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(sorted(set(self.points))))

    def __contains__(self, site: Site) -> bool:
        return site in set(self.points)

    @property
    def point_set(self) -> frozenset:
        return frozenset(self.points)

    def is_empty(self) -> bool:
        return not self.points


def staircase_from_config(
    positions: Mapping[int, int], half: str = FULL, K: Optional[int] = None
) -> StartSet:
    """Start set {(k + x_k(0), k)} from particle positions x_k(0).

    ``half`` selects labels k > 0 (upper), k <= 0 (lower) or all; ``K``
    truncates to |k| <= K.  Positions must be strictly decreasing in k.
    """
    labels = sorted(positions)
    for a, b in zip(labels, labels[1:]):
        if b == a + 1 and positions[b] >= positions[a]:
            raise InvalidConfigurationError(
                f"positions must decrease strictly in the label: "
                f"x_{b}={positions[b]} >= x_{a}={positions[a]}"
            )
    pts = []
    for k in labels:
        if half == UPPER and k <= 0:
            continue
        if half == LOWER and k > 0:
            continue
        if K is not None and abs(k) > K:
            continue
        pts.append((k + positions[k], k))
    return StartSet(points=tuple(pts), half=half, truncation=K)


def two_speed_positions(K: int) -> Dict[int, int]:
    """x_k(0) = -2k for k != 0 and x_0(0) = 1, truncated to |k| <= K."""
    pos = {k: -2 * k for k in range(-K, K + 1)}
    pos[0] = 1
    return pos


@dataclass(frozen=True)
class PassageGrid:
    """Passage times from a start set over a window (-inf = unreachable)."""

    window: Window
    times: np.ndarray
    start: StartSet

    def time(self, site: Site) -> float:
        t = self.time_or_neg_inf(site)
        if is_unreachable(t):
            raise UnreachableSiteError(f"site {site} unreachable from start set")
        return t

    def time_or_neg_inf(self, site: Site) -> float:
        a, b = self.window.index(site)
        return float(self.times[a, b])

    def reachable(self, site: Site) -> bool:
        return not is_unreachable(self.time_or_neg_inf(site))


@njit(cache=True)
def _dp_sweep(times, weights, seed_mask, blocked_mask):
    ni, nj = times.shape
    for b in range(nj):
        for a in range(ni):
            if blocked_mask[a, b]:
                times[a, b] = -np.inf
                continue
            if seed_mask[a, b]:
                times[a, b] = 0.0
                continue
            best = -np.inf
            if a > 0 and times[a - 1, b] > best:
                best = times[a - 1, b]
            if b > 0 and times[a, b - 1] > best:
                best = times[a, b - 1]
            if best == -np.inf:
                times[a, b] = -np.inf
            else:
                times[a, b] = best + weights[a, b]


def _weights_subarray(weights: WeightSample, window: Window) -> np.ndarray:
    if not weights.covers(window):
        raise CoverageError(f"weights cover {weights.window}, need {window}")
    a0 = window.imin - weights.window.imin
    b0 = window.jmin - weights.window.jmin
    ni, nj = window.shape
    return weights.values[a0 : a0 + ni, b0 : b0 + nj]


def passage_times(
    weights: WeightSample,
    start: StartSet,
    window: Window,
    forbidden: Optional[Callable[[int, int], bool]] = None,
) -> PassageGrid:
    """Fill the window with last passage times from ``start``.

    Only start points inside the window seed the recursion; windows are
    expected to contain every start point that can reach a site of interest
    (up-right paths stay in the bounding rectangle of their endpoints).
    """
    w = _weights_subarray(weights, window)
    ni, nj = window.shape
    seed = np.zeros((ni, nj), dtype=np.bool_)
    for p in start.points:
        if window.contains(p):
            a, b = window.index(p)
            seed[a, b] = True
    blocked = np.zeros((ni, nj), dtype=np.bool_)
    if forbidden is not None:
        for j in range(window.jmin, window.jmax + 1):
            for i in range(window.imin, window.imax + 1):
                if forbidden(i, j):
                    blocked[i - window.imin, j - window.jmin] = True
    seed &= ~blocked
    times = np.empty((ni, nj))
    _dp_sweep(times, w, seed, blocked)
    return PassageGrid(window=window, times=times, start=start)


def point_passage(weights: WeightSample, a: Site, b: Site) -> float:
    """L_{a->b}; returns the -inf sentinel when b is not above-right of a."""
    if b[0] < a[0] or b[1] < a[1]:
        return NEG_INF
    window = Window(a[0], b[0], a[1], b[1])
    grid = passage_times(weights, StartSet(points=(a,)), window)
    return grid.time_or_neg_inf(b)


def restricted_passage(
    weights: WeightSample,
    start: StartSet,
    end: Site,
    forbidden: Callable[[int, int], bool],
) -> float:
    """Max over up-right paths from ``start`` to ``end`` avoiding forbidden sites."""
    pts = [p for p in start.points if p[0] <= end[0] and p[1] <= end[1]]
    if not pts:
        return NEG_INF
    window = Window.bounding(pts + [end])
    grid = passage_times(weights, StartSet(points=tuple(pts)), window, forbidden=forbidden)
    return grid.time_or_neg_inf(end)


@dataclass(frozen=True)
class LatticePath:
    """Up-right path as an ordered site tuple."""

    points: Tuple[Site, ...]

    def __post_init__(self) -> None:
        for p, q in zip(self.points, self.points[1:]):
            step = (q[0] - p[0], q[1] - p[1])
            if step not in ((1, 0), (0, 1)):
                raise ValueError(f"not an up-right step: {p} -> {q}")

    @property
    def length(self) -> int:
        return len(self.points) - 1

    def weight_sum(self, weights: WeightSample, start: StartSet) -> float:
        total = 0.0
        for p in self.points:
            if p not in start:
                total += weights.value(p)
        return total


def max_path(grid: PassageGrid, endpoint: Site) -> LatticePath:
    """Backtrack a maximizing path from ``endpoint`` to the start set.

    Ties (probability zero for continuous weights) resolve to the horizontal
    predecessor, so synthetic integer-weight tests are deterministic.
    """
    if not grid.reachable(endpoint):
        raise NoPathError(f"endpoint {endpoint} unreachable")
    start = grid.start.point_set
    rev = [endpoint]
    cur = endpoint
    while cur not in start:
        i, j = cur
        left = (i - 1, j)
        below = (i, j - 1)
        tl = grid.time_or_neg_inf(left) if grid.window.contains(left) else NEG_INF
        tb = grid.time_or_neg_inf(below) if grid.window.contains(below) else NEG_INF
        if is_unreachable(tl) and is_unreachable(tb):
            raise NoPathError(f"backtrack dead end at {cur}")
        cur = left if tl >= tb else below
        rev.append(cur)
    return LatticePath(points=tuple(reversed(rev)))


def path_hits(path: LatticePath, targets: Iterable[Site]) -> bool:
    pts = set(path.points)
    return any(t in pts for t in targets)


def _count_paths(di: int, dj: int) -> int:
    return math.comb(di + dj, di)


def brute_force_passage(weights: WeightSample, a: Site, b: Site) -> float:
    """Exhaustive max over all up-right paths a -> b (test oracle).

    Accumulates each path sum forward from the start, the same associativity
    as the DP, so agreement with :func:`point_passage` is exact.  Refuses
    windows with more than ``BRUTE_FORCE_PATH_LIMIT`` paths.
    """
    if b[0] < a[0] or b[1] < a[1]:
        return NEG_INF
    di, dj = b[0] - a[0], b[1] - a[1]
    if _count_paths(di, dj) > BRUTE_FORCE_PATH_LIMIT:
        raise TooManyPathsError(f"{_count_paths(di, dj)} paths from {a} to {b}")

    best = NEG_INF

    def walk(i: int, j: int, acc: float) -> None:
        nonlocal best
        if (i, j) == b:
            if acc > best:
                best = acc
            return
        if i < b[0]:
            walk(i + 1, j, acc + weights.value((i + 1, j)))
        if j < b[1]:
            walk(i, j + 1, acc + weights.value((i, j + 1)))

    walk(a[0], a[1], 0.0)
    return best


def brute_force_from_set(weights: WeightSample, start: StartSet, b: Site) -> float:
    best = NEG_INF
    for p in start.points:
        v = brute_force_passage(weights, p, b)
        if v > best:
            best = v
    return best
