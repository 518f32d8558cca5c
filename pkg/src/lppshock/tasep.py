"""TASEP driven by the same randomness as the passage-time model.

Particles on Z jump right at exponential rates under the exclusion rule.
Labeling particles right to left with positions x_n(0), the staircase
``{(k + x_k(0), k)}`` turns particle trajectories into passage times: with
T(m, n) the time particle n reaches position m - n,

    T(m, n) = w(m, n) + max(T(m-1, n), T(m, n-1)),   T = 0 on the staircase,

because particle n needs its own previous jump done (left argument) and its
predecessor to have cleared the target site (right argument), then waits
w(m, n).  This is the same max-plus recursion the passage grid solves, so
``evolve_from_weights`` and the passage module agree bit for bit, and the
indicator identity {x_n(t) >= m - n} = {T(m, n) <= t} holds pathwise (with
T = -inf at never-occupied coordinates, where both sides are true).

Two independent realizations of the dynamics exist on purpose:

* the max-plus route above (fast; inherits the correspondence), and
* an event-driven simulation that replays the same waiting times through a
  priority queue (slow; validates the correspondence pathwise).

The second-class particle uses site-attached Poisson clocks (the graphical
construction), under which two copies differing in a single site keep a
single discrepancy forever; its position tracks the shock.  Clocks are
site-attached rather than particle-attached because the basic coupling is
defined site-wise; for rate-1 TASEP the two constructions agree in law.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from numba import njit, uint64

from .lattice import Site, Window
from .lpp import FULL, CoverageError, PassageGrid, StartSet, passage_times, staircase_from_config
from .rng import DOMAIN_CLOCK, DOMAIN_OCCUPANCY, key_u01, site_key
from .weights import RateField, SeedPlan, WeightSample, rate_at


class RateMismatchError(ValueError):
    """Weight field rates disagree with the particle rates."""


class CouplingError(RuntimeError):
    """The coupled pair lost its single-discrepancy invariant."""


@dataclass(frozen=True)
class ParticleConfig:
    """Initial particle positions by label (right to left) and jump rates.

    Labels must form a contiguous range; positions strictly decrease in the
    label.
    """

    positions: Dict[int, int]
    rates: Optional[Dict[int, float]] = None

    def __post_init__(self) -> None:
        labels = sorted(self.positions)
        if labels and labels != list(range(labels[0], labels[-1] + 1)):
            raise ValueError("particle labels must be contiguous")
        for a, b in zip(labels, labels[1:]):
            if self.positions[b] >= self.positions[a]:
                raise ValueError(
                    f"x_{b}={self.positions[b]} must lie left of x_{a}={self.positions[a]}"
                )

    def rate(self, label: int) -> float:
        if self.rates is None:
            return 1.0
        return self.rates[label]

    def staircase_column(self, label: int) -> int:
        return label + self.positions[label]

    def start_set(self, half: str = FULL, K: Optional[int] = None) -> StartSet:
        return staircase_from_config(self.positions, half=half, K=K)


@dataclass(frozen=True)
class JumpTable:
    """Completion times T(m, n) on a window of passage coordinates."""

    grid: PassageGrid
    config: ParticleConfig

    def completion_time(self, m: int, n: int) -> float:
        return self.grid.time_or_neg_inf((m, n))

    def position_at(self, n: int, t: float) -> int:
        """x_n(t) within the table's window (largest position reached by t)."""
        x = self.config.positions[n]
        for m in range(self.grid.window.imin, self.grid.window.imax + 1):
            T = self.grid.time_or_neg_inf((m, n))
            if T != -math.inf and T <= t and m - n > x:
                x = m - n
        return x

    def holds_correspondence(self, m: int, n: int, t: float) -> bool:
        """Indicator identity {x_n(t) >= m - n} == {T(m, n) <= t}."""
        lhs = self.position_at(n, t) >= m - n
        rhs = self.completion_time(m, n) <= t  # -inf <= t: never-needed coordinate
        return lhs == rhs


def _validate_window(config: ParticleConfig, window: Window) -> None:
    for n in range(window.jmin, window.jmax + 1):
        if n not in config.positions:
            raise CoverageError(f"window row {n} has no particle in the configuration")
        col = config.staircase_column(n)
        if col < window.imin:
            raise CoverageError(
                f"staircase point ({col}, {n}) lies left of the window; "
                "its row would miss paths entering from it"
            )


def _check_rates(config: ParticleConfig, weights: WeightSample, window: Window) -> None:
    for n in range(window.jmin, window.jmax + 1):
        expected = config.rate(n)
        got = rate_at(weights.field, (window.imax, n))  # off-staircase probe
        if not math.isclose(got, expected, rel_tol=1e-12):
            raise RateMismatchError(f"row {n}: field rate {got}, particle rate {expected}")


def evolve_from_weights(config: ParticleConfig, weights: WeightSample, window: Window) -> JumpTable:
    """Jump table via the max-plus recursion (the fast route)."""
    _validate_window(config, window)
    _check_rates(config, weights, window)
    start = config.start_set()
    grid = passage_times(weights, start, window)
    return JumpTable(grid=grid, config=config)


def event_driven_jump_table(
    config: ParticleConfig, weights: WeightSample, window: Window
) -> JumpTable:
    """Jump table via an explicit discrete-event simulation (the oracle).

    Every particle waits its tabulated clock after becoming unblocked; the
    completion time is ``unblock + w``, evaluated in event order, which is
    the same floating-point arithmetic as the max-plus sweep.  Labels below
    ``window.jmin`` are treated as absent (no blocker), matching the
    window semantics of the passage grid.
    """
    _validate_window(config, window)
    _check_rates(config, weights, window)
    start = config.start_set()
    n0, n1 = window.jmin, window.jmax
    ni, nj = window.shape
    times = np.full((ni, nj), -np.inf)

    last_done: Dict[int, Tuple[int, float]] = {}  # label -> (last coordinate m, time)
    for n in range(n0, n1 + 1):
        m0 = config.staircase_column(n)
        last_done[n] = (m0, 0.0)
        if window.contains((m0, n)):
            times[window.index((m0, n))] = 0.0

    def completion_of(m: int, n: int) -> float:
        if m <= config.staircase_column(n):
            return 0.0
        if window.contains((m, n)):
            t = times[window.index((m, n))]
            return t if t != -np.inf else -math.inf
        return -math.inf

    heap: List[Tuple[float, int, int]] = []

    def try_schedule(n: int) -> None:
        m_prev, t_own = last_done[n]
        m = m_prev + 1
        if m > window.imax:
            return
        if n > n0:
            t_pred = completion_of(m, n - 1)
            if t_pred == -math.inf:
                return  # predecessor has not cleared the target site yet
            enable = max(t_own, t_pred)
        else:
            enable = t_own
        w = weights.value((m, n))
        heapq.heappush(heap, (enable + w, m, n))

    for n in range(n0, n1 + 1):
        try_schedule(n)

    while heap:
        t, m, n = heapq.heappop(heap)
        m_prev, _ = last_done[n]
        if m != m_prev + 1:
            continue  # duplicate of an already-processed jump
        last_done[n] = (m, t)
        if window.contains((m, n)):
            times[window.index((m, n))] = t
        try_schedule(n)
        if n + 1 <= n1:
            try_schedule(n + 1)  # the freed site may unblock the follower

    grid = PassageGrid(window=window, times=times, start=start)
    return JumpTable(grid=grid, config=config)


@dataclass(frozen=True)
class SecondClassTrack:
    """Piecewise-constant trajectory of the discrepancy site, X(0) = 0."""

    jump_times: np.ndarray
    positions: np.ndarray  # position after each jump
    horizon: float

    def __post_init__(self) -> None:
        if len(self.jump_times) != len(self.positions):
            raise ValueError("jump_times and positions lengths differ")
        if np.any(np.diff(self.jump_times) < 0):
            raise ValueError("jump times must be nondecreasing")
        if np.any(np.abs(np.diff(np.concatenate(([0], self.positions)))) != 1):
            raise ValueError("discrepancy jumps must have size 1")

    def position(self, t: float) -> int:
        if t < 0:
            raise ValueError("negative time")
        k = np.searchsorted(self.jump_times, t, side="right")
        return 0 if k == 0 else int(self.positions[k - 1])


_STATUS_OK = 0
_STATUS_COUPLING = 1
_STATUS_CAPACITY = 2


@njit(cache=True)
def _harris_coupled_kernel(master, replica, rho_minus, rho_plus, horizon, halfwidth, cap):
    """Basic coupling of two TASEPs differing only at the origin.

    Site-attached rate-1 clocks realized as a global Poisson stream over the
    window with a uniform site mark.  eta has a hole at the origin,
    eta_prime a particle; the discrepancy site is returned as a jump list.
    """
    nsites = 2 * halfwidth + 1
    eta = np.zeros(nsites, dtype=np.uint8)
    etap = np.zeros(nsites, dtype=np.uint8)
    for s in range(nsites):
        x = s - halfwidth
        if x == 0:
            continue
        rho = rho_minus if x < 0 else rho_plus
        u = key_u01(site_key(master, replica, uint64(DOMAIN_OCCUPANCY), x, 0))
        if u < rho:
            eta[s] = 1
            etap[s] = 1
    etap[halfwidth] = 1  # discrepancy at the origin

    times = np.empty(cap)
    positions = np.empty(cap, dtype=np.int64)
    njumps = 0
    disc = halfwidth

    t = 0.0
    k = 0  # event counter keying the clock stream
    total_rate = float(nsites)
    while True:
        gap = -np.log(key_u01(site_key(master, replica, uint64(DOMAIN_CLOCK), 0, k))) / total_rate
        u = key_u01(site_key(master, replica, uint64(DOMAIN_CLOCK), 1, k))
        k += 1
        t += gap
        if t > horizon:
            break
        s = int(u * nsites)
        if s >= nsites - 1:
            continue  # the right edge site has no in-window target; frozen
        if eta[s] == 1 and eta[s + 1] == 0:
            eta[s] = 0
            eta[s + 1] = 1
        if etap[s] == 1 and etap[s + 1] == 0:
            etap[s] = 0
            etap[s + 1] = 1
        if eta[disc] == etap[disc]:
            # the old discrepancy resolved; the new one must sit on the edge
            if eta[s] != etap[s]:
                disc = s
            elif eta[s + 1] != etap[s + 1]:
                disc = s + 1
            else:
                return njumps, times, positions, _STATUS_COUPLING
            if njumps >= cap:
                return njumps, times, positions, _STATUS_CAPACITY
            times[njumps] = t
            positions[njumps] = disc - halfwidth
            njumps += 1
    return njumps, times, positions, _STATUS_OK


def second_class_trajectory(
    rho_minus: float,
    rho_plus: float,
    horizon: float,
    plan: SeedPlan,
    halfwidth: Optional[int] = None,
) -> SecondClassTrack:
    """Second-class particle of the Bernoulli(rho-, rho+) shock profile.

    The window is padded by three light-cone widths so the frozen boundary
    cannot influence the discrepancy within the horizon.
    """
    if halfwidth is None:
        halfwidth = int(3 * horizon) + 10
    cap = int(8 * horizon) + 64
    njumps, times, positions, status = _harris_coupled_kernel(
        np.uint64(plan.master_seed),
        np.uint64(plan.replica_index),
        rho_minus,
        rho_plus,
        float(horizon),
        halfwidth,
        cap,
    )
    if status == _STATUS_COUPLING:
        raise CouplingError("discrepancy count left 1 during the coupled evolution")
    if status == _STATUS_CAPACITY:
        raise CouplingError("jump buffer overflow; discrepancy moved implausibly often")
    return SecondClassTrack(
        jump_times=times[:njumps].copy(),
        positions=positions[:njumps].copy(),
        horizon=float(horizon),
    )


@njit(cache=True)
def _harris_profile_kernel(master, replica, rho_minus, rho_plus, horizon, halfwidth):
    """Final occupancy of one TASEP started from the Bernoulli shock profile."""
    nsites = 2 * halfwidth + 1
    eta = np.zeros(nsites, dtype=np.uint8)
    for s in range(nsites):
        x = s - halfwidth
        rho = rho_minus if x < 0 else rho_plus
        u = key_u01(site_key(master, replica, uint64(DOMAIN_OCCUPANCY), x, 0))
        if u < rho:
            eta[s] = 1
    t = 0.0
    k = 0
    total_rate = float(nsites)
    while True:
        gap = -np.log(key_u01(site_key(master, replica, uint64(DOMAIN_CLOCK), 0, k))) / total_rate
        u = key_u01(site_key(master, replica, uint64(DOMAIN_CLOCK), 1, k))
        k += 1
        t += gap
        if t > horizon:
            break
        s = int(u * nsites)
        if s >= nsites - 1:
            continue
        if eta[s] == 1 and eta[s + 1] == 0:
            eta[s] = 0
            eta[s + 1] = 1
    return eta


def sample_shock_profile_state(
    rho_minus: float,
    rho_plus: float,
    horizon: float,
    plan: SeedPlan,
    halfwidth: Optional[int] = None,
) -> Tuple[np.ndarray, int]:
    """One final occupancy array; site x lives at index x + halfwidth."""
    if halfwidth is None:
        halfwidth = int(3 * horizon) + 10
    eta = _harris_profile_kernel(
        np.uint64(plan.master_seed),
        np.uint64(plan.replica_index),
        rho_minus,
        rho_plus,
        float(horizon),
        halfwidth,
    )
    return eta, halfwidth


def empirical_density_profile(
    states: List[np.ndarray], halfwidth: int, t: float, bins: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean occupancy binned in the hydrodynamic coordinate xi = x / t.

    ``bins`` holds the xi bin edges; returns (bin centers, mean density).
    """
    if not states:
        raise ValueError("empty ensemble")
    mean_occ = np.mean(np.stack(states).astype(np.float64), axis=0)
    x = np.arange(-halfwidth, halfwidth + 1)
    xi = x / t
    centers = 0.5 * (bins[:-1] + bins[1:])
    prof = np.empty(len(centers))
    for b in range(len(centers)):
        sel = (xi >= bins[b]) & (xi < bins[b + 1])
        prof[b] = mean_occ[sel].mean() if np.any(sel) else np.nan
    return centers, prof
