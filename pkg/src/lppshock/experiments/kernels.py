"""Streaming numba kernels for the ensemble experiments.

The reference modules materialize full weight windows and passage grids;
these kernels recompute each weight on the fly from its counter-based key
(same keys, bit-identical values) and keep only two rows of the dynamic
program, so a replica at t = 4000 costs megabytes instead of gigabytes.
Equality with the reference implementations on small windows is asserted in
the test suite.

Interface tracing co-advances with the row sweep: while the sweep sits on
row j, the interface consumes its run of rightward steps on row j-1 (each
probing the freshly computed row-j passage values) and then its single up
step.  Column ranges are pruned on the right at ``cap``, the interface's
law-of-large-numbers column plus a generous fluctuation margin; the pruning
is exact for every path probed as long as the interface stays below the
cap, and a replica that ever reaches it aborts with an overflow status so
the caller can rerun it with a doubled margin (same keys, same weights).

Passage-time conventions match the reference: start sites contribute no
weight, sums accumulate left-associatively along paths, unreachable is
``-inf``.  Ties in interface colors abort the replica with a tie status.

All ensembles are embarrassingly parallel over the replica index; results
land in preallocated slots, so thread scheduling cannot affect output.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange, uint64

from ..rng import DOMAIN_WEIGHT, key_u01, site_key

_U = np.uint64
_DOM = uint64(DOMAIN_WEIGHT)

STATUS_OK = 0
STATUS_TIE = 1
STATUS_OVERFLOW = 2


@njit(cache=True, inline="always")
def _w(master, replica, i, j, rate):
    return -np.log(key_u01(site_key(master, replica, _DOM, i, j))) / rate


# ---------------------------------------------------------------------------
# Two-speed staircase interface
# ---------------------------------------------------------------------------


@njit(cache=True)
def two_speed_trace(master, replica, alpha, n, margin):
    """Trace the two-speed competition interface for n steps.

    Returns (i_path, tau, status): i_path[k] is I_k (so J_k = k - I_k),
    tau[k] the passage time from the full staircase to phi_k (tau[0] = 0 by
    convention).
    """
    NEG = -np.inf
    eta0 = alpha / (2.0 - alpha)
    cap = int(np.ceil(n * eta0 / (1.0 + eta0))) + margin

    i_path = np.zeros(n + 1, dtype=np.int64)
    tau = np.zeros(n + 1)

    # upper cluster: rows 1..n, cols -j..cap (start at (-j, j))
    offp = n  # array index = col + offp
    wp = n + cap + 2
    lp_old = np.full(wp, NEG)
    lp_new = np.full(wp, NEG)
    # lower cluster: rows -cap..n, cols 1..cap (plus the corner point (1,0))
    lm_old = np.full(cap + 2, NEG)
    lm_new = np.full(cap + 2, NEG)

    for j in range(-cap, 1):
        for c in range(max(1, -j), cap + 1):
            if (j < 0 and c == -j) or (j == 0 and c == 1):
                lm_new[c] = 0.0
            else:
                best = lm_new[c - 1] if lm_new[c - 1] > lm_old[c] else lm_old[c]
                lm_new[c] = NEG if best == NEG else best + _w(master, replica, c, j, alpha)
        tmp = lm_old
        lm_old = lm_new
        lm_new = tmp
        for c in range(cap + 2):
            lm_new[c] = NEG

    ii = 0
    jj = 0
    step = 0

    for j in range(1, n + 1):
        for c in range(-j, cap + 1):
            idx = c + offp
            if c == -j:
                lp_new[idx] = 0.0
            else:
                best = lp_new[idx - 1] if lp_new[idx - 1] > lp_old[idx] else lp_old[idx]
                lp_new[idx] = NEG if best == NEG else best + _w(master, replica, c, j, 1.0)
        for c in range(1, cap + 1):
            best = lm_new[c - 1] if lm_new[c - 1] > lm_old[c] else lm_old[c]
            lm_new[c] = NEG if best == NEG else best + _w(master, replica, c, j, 1.0)

        while jj == j - 1 and step < n:
            pc = ii + 1
            if pc >= cap:
                return i_path, tau, STATUS_OVERFLOW
            a = lp_new[pc + offp]
            b = lm_new[pc]
            if a == b:
                return i_path, tau, STATUS_TIE
            if a > b:
                ii += 1
                ta = lp_old[ii + offp]
                tb = lm_old[ii] if ii <= cap else NEG
            else:
                jj += 1
                ta = lp_new[ii + offp]
                tb = lm_new[ii] if ii <= cap else NEG
            step += 1
            i_path[step] = ii
            tau[step] = ta if ta > tb else tb

        tmp = lp_old
        lp_old = lp_new
        lp_new = tmp
        tmp = lm_old
        lm_old = lm_new
        lm_new = tmp
        if step >= n:
            break
    return i_path, tau, STATUS_OK


@njit(cache=True, parallel=True)
def two_speed_ensemble(master, n_rep, alpha, n, margin):
    """Final interface columns I_n for replicas 0..n_rep-1."""
    i_final = np.zeros(n_rep, dtype=np.int64)
    status = np.zeros(n_rep, dtype=np.int64)
    for r in prange(n_rep):
        ip, _, st = two_speed_trace(_U(master), _U(r), alpha, n, margin)
        i_final[r] = ip[n]
        status[r] = st
    return i_final, status


# ---------------------------------------------------------------------------
# Bernoulli boundary interface (corner model)
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _bern_rate(c, j, rho_minus, rho_plus):
    if c == 0 and j == 0:
        return np.inf  # deterministic zero weight at the corner
    if c == 0:
        return rho_minus
    if j == 0:
        return 1.0 - rho_plus
    return 1.0


@njit(cache=True)
def bernoulli_trace(master, replica, rho_minus, rho_plus, n, margin):
    """Trace the corner-model interface for n steps.

    Both cluster problems start at the corner; the upper one forbids (1,0)
    and the lower one forbids (0,1), which routes each first step through
    its own boundary weight (colors would tie along the first row and
    column otherwise).
    """
    NEG = -np.inf
    eta = (1.0 - rho_plus) * (1.0 - rho_minus) / (rho_minus * rho_plus)
    cap = int(np.ceil(n * eta / (1.0 + eta))) + margin

    i_path = np.zeros(n + 1, dtype=np.int64)
    tau = np.zeros(n + 1)

    lp_old = np.full(cap + 2, NEG)
    lp_new = np.full(cap + 2, NEG)
    lm_old = np.full(cap + 2, NEG)
    lm_new = np.full(cap + 2, NEG)

    # row 0: the corner seeds both problems; (1,0) is forbidden for the
    # upper one, so its row 0 is the seed alone
    lp_old[0] = 0.0
    lm_old[0] = 0.0
    for c in range(1, cap + 1):
        w = _w(master, replica, c, 0, _bern_rate(c, 0, rho_minus, rho_plus))
        lm_old[c] = lm_old[c - 1] + w

    ii = 0
    jj = 0
    step = 0

    for j in range(1, n + 1):
        for c in range(0, cap + 1):
            w = _w(master, replica, c, j, _bern_rate(c, j, rho_minus, rho_plus))
            if c == 0:
                # upper boundary column; the whole column is forbidden for
                # the lower problem once (0,1) is blocked
                lp_new[0] = NEG if lp_old[0] == NEG else lp_old[0] + w
                lm_new[0] = NEG
            else:
                bestp = lp_new[c - 1] if lp_new[c - 1] > lp_old[c] else lp_old[c]
                lp_new[c] = NEG if bestp == NEG else bestp + w
                bestm = lm_new[c - 1] if lm_new[c - 1] > lm_old[c] else lm_old[c]
                lm_new[c] = NEG if bestm == NEG else bestm + w

        while jj == j - 1 and step < n:
            pc = ii + 1
            if pc >= cap:
                return i_path, tau, STATUS_OVERFLOW
            a = lp_new[pc]
            b = lm_new[pc]
            if a == b:
                return i_path, tau, STATUS_TIE
            if a > b:
                ii += 1
                ta = lp_old[ii]
                tb = lm_old[ii]
            else:
                jj += 1
                ta = lp_new[ii]
                tb = lm_new[ii]
            step += 1
            i_path[step] = ii
            tau[step] = ta if ta > tb else tb

        tmp = lp_old
        lp_old = lp_new
        lp_new = tmp
        tmp = lm_old
        lm_old = lm_new
        lm_new = tmp
        if step >= n:
            break
    return i_path, tau, STATUS_OK


@njit(cache=True, parallel=True)
def bernoulli_ensemble(master, n_rep, rho_minus, rho_plus, n, margin):
    i_final = np.zeros(n_rep, dtype=np.int64)
    status = np.zeros(n_rep, dtype=np.int64)
    for r in prange(n_rep):
        ip, _, st = bernoulli_trace(_U(master), _U(r), rho_minus, rho_plus, n, margin)
        i_final[r] = ip[n]
        status[r] = st
    return i_final, status


@njit(cache=True)
def bernoulli_endpoint(master, replica, rho_minus, rho_plus, t, x_end):
    """(L_plus, L_minus) of the two restricted corner problems at (x_end, t)."""
    NEG = -np.inf
    lp_old = np.full(x_end + 1, NEG)
    lp_new = np.full(x_end + 1, NEG)
    lm_old = np.full(x_end + 1, NEG)
    lm_new = np.full(x_end + 1, NEG)
    lp_old[0] = 0.0
    lm_old[0] = 0.0
    for c in range(1, x_end + 1):
        w = _w(master, replica, c, 0, _bern_rate(c, 0, rho_minus, rho_plus))
        lm_old[c] = lm_old[c - 1] + w
    for j in range(1, t + 1):
        for c in range(0, x_end + 1):
            w = _w(master, replica, c, j, _bern_rate(c, j, rho_minus, rho_plus))
            if c == 0:
                lp_new[0] = NEG if lp_old[0] == NEG else lp_old[0] + w
                lm_new[0] = NEG
            else:
                bestp = lp_new[c - 1] if lp_new[c - 1] > lp_old[c] else lp_old[c]
                lp_new[c] = NEG if bestp == NEG else bestp + w
                bestm = lm_new[c - 1] if lm_new[c - 1] > lm_old[c] else lm_old[c]
                lm_new[c] = NEG if bestm == NEG else bestm + w
        tmp = lp_old
        lp_old = lp_new
        lp_new = tmp
        tmp = lm_old
        lm_old = lm_new
        lm_new = tmp
    return lp_old[x_end], lm_old[x_end]


@njit(cache=True, parallel=True)
def bernoulli_endpoint_ensemble(master, n_rep, rho_minus, rho_plus, t, x_end):
    out = np.zeros((n_rep, 2))
    for r in prange(n_rep):
        a, b = bernoulli_endpoint(_U(master), _U(r), rho_minus, rho_plus, t, x_end)
        out[r, 0] = a
        out[r, 1] = b
    return out


# ---------------------------------------------------------------------------
# Point sources (multipoint model, tails, local increments)
# ---------------------------------------------------------------------------


@njit(cache=True)
def point_source_final_row(master, replica, rate, src_i, src_j, col_max, row_max):
    """Passage times from (src_i, src_j) to every (c, row_max), c <= col_max.

    Rolling-row DP on the rectangle [src_i..col_max] x [src_j..row_max];
    entry c of the result is L_{src -> (c, row_max)} (-inf left of src).
    """
    NEG = -np.inf
    width = col_max - src_i + 1
    old = np.full(width, NEG)
    new = np.full(width, NEG)
    old[0] = 0.0
    for c in range(1, width):
        old[c] = old[c - 1] + _w(master, replica, src_i + c, src_j, rate)
    for j in range(src_j + 1, row_max + 1):
        for c in range(width):
            if c == 0:
                best = old[0]
            else:
                best = new[c - 1] if new[c - 1] > old[c] else old[c]
            new[c] = NEG if best == NEG else best + _w(master, replica, src_i + c, j, rate)
        tmp = old
        old = new
        new = tmp
    return old


@njit(cache=True, parallel=True)
def multipoint_ensemble(master, n_rep, beta_offset, t, end_cols):
    """(L_plus, L_minus) at the endpoints (end_cols[k], t) for each replica.

    The upper source sits at (-beta_offset, 0), the lower at (0, -beta_offset);
    weights are rate 1 everywhere and shared between the two problems.
    """
    m = len(end_cols)
    cmax = int(np.max(np.asarray(end_cols)))
    out = np.zeros((n_rep, 2, m))
    for r in prange(n_rep):
        rowp = point_source_final_row(_U(master), _U(r), 1.0, -beta_offset, 0, cmax, t)
        rowm = point_source_final_row(_U(master), _U(r), 1.0, 0, -beta_offset, cmax, t)
        for k in range(m):
            out[r, 0, k] = rowp[end_cols[k] + beta_offset]
            out[r, 1, k] = rowm[end_cols[k]]
    return out


@njit(cache=True, parallel=True)
def point_to_point_ensemble(master, n_rep, rate, x_end, y_end):
    """L_{(0,0)->(x_end, y_end)} for replicas 0..n_rep-1."""
    out = np.zeros(n_rep)
    for r in prange(n_rep):
        row = point_source_final_row(_U(master), _U(r), rate, 0, 0, x_end, y_end)
        out[r] = row[x_end]
    return out


@njit(cache=True, parallel=True)
def local_increment_ensemble(master, n_rep, rate, col_base, col_shift, row_max):
    """(L to (col_base, row), L to (col_shift, row)) per replica, shared weights."""
    cmax = col_base if col_base > col_shift else col_shift
    out = np.zeros((n_rep, 2))
    for r in prange(n_rep):
        row = point_source_final_row(_U(master), _U(r), rate, 0, 0, cmax, row_max)
        out[r, 0] = row[col_base]
        out[r, 1] = row[col_shift]
    return out


# ---------------------------------------------------------------------------
# Two-speed staircase passage values (slow decorrelation)
# ---------------------------------------------------------------------------


@njit(cache=True)
def two_speed_upper_values(master, replica, alpha, col_a, row_a, col_b, row_b):
    """L from the upper staircase {(-k, k)} to (col_a, row_a) and (col_b, row_b).

    Weights above the axis are rate 1 (the upper problem never sees the
    slow region).  Rows must satisfy row_a <= row_b.
    """
    NEG = -np.inf
    cap = col_a if col_a > col_b else col_b
    n = row_b
    offp = n
    width = n + cap + 2
    old = np.full(width, NEG)
    new = np.full(width, NEG)
    va = NEG
    for j in range(1, n + 1):
        for c in range(-j, cap + 1):
            idx = c + offp
            if c == -j:
                new[idx] = 0.0
            else:
                best = new[idx - 1] if new[idx - 1] > old[idx] else old[idx]
                new[idx] = NEG if best == NEG else best + _w(master, replica, c, j, 1.0)
        if j == row_a:
            va = new[col_a + offp]
        tmp = old
        old = new
        new = tmp
    vb = old[col_b + offp]
    return va, vb


@njit(cache=True)
def bridge_passage(master, replica, rate, src_i, src_j, dst_i, dst_j):
    """L_{src -> dst} on the small box between them (start excluded, end included)."""
    row = point_source_final_row(master, replica, rate, src_i, src_j, dst_i, dst_j)
    return row[dst_i - src_i]


@njit(cache=True, parallel=True)
def slow_decorrelation_ensemble(master, n_rep, alpha, t, t_nu):
    """(L_{L+ -> E}, L_{L+ -> E+}, L_{E+ -> E}) per replica.

    E = (floor(eta0 t), t); E+ sits a diagonal step t_nu before it (the
    upper problem's characteristic into E is the diagonal because the bulk
    above the axis is homogeneous rate 1 and the source line is flat).
    """
    eta0 = alpha / (2.0 - alpha)
    e_col = int(np.floor(eta0 * t))
    ep_col = e_col - t_nu
    ep_row = t - t_nu
    out = np.zeros((n_rep, 3))
    for r in prange(n_rep):
        va, vb = two_speed_upper_values(_U(master), _U(r), alpha, ep_col, ep_row, e_col, t)
        bridge = bridge_passage(_U(master), _U(r), 1.0, ep_col, ep_row, e_col, t)
        out[r, 0] = vb
        out[r, 1] = va
        out[r, 2] = bridge
    return out


# ---------------------------------------------------------------------------
# Maximizer crossing checks (choice matrices + backtracking)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _backtrack_hits(choice, row0, col0, end_r, end_c, d_row0, d_col_a, d_col_b):
    """Walk a choice matrix from (end_r, end_c) to a seed; report D-set hits.

    choice[r, c]: 0 step from below, 1 step from the left, 2 seed.
    Rows/cols are matrix indices; lattice row = row0 + r, col = col0 + c.
    d_col_a/b give up to two forbidden columns per lattice row >= d_row0.
    """
    r = end_r
    c = end_c
    nd = len(d_col_a)
    while True:
        lat_r = row0 + r
        lat_c = col0 + c
        k = lat_r - d_row0
        if 0 <= k < nd:
            if lat_c == d_col_a[k] or lat_c == d_col_b[k]:
                return True
        ch = choice[r, c]
        if ch == 2:
            return False
        if ch == 1:
            c -= 1
        else:
            r -= 1


@njit(cache=True)
def point_source_hits(
    master, replica, rate, src_i, src_j, ends_i, ends_j, d_row0, d_col_a, d_col_b
):
    """For each endpoint, does the maximizing path touch the D set?

    Full DP with a choice matrix from a single source; ties prefer the
    horizontal predecessor.  Endpoints share one sweep.
    """
    NEG = -np.inf
    cmax = int(np.max(np.asarray(ends_i)))
    rmax = int(np.max(np.asarray(ends_j)))
    width = cmax - src_i + 1
    height = rmax - src_j + 1
    choice = np.zeros((height, width), dtype=np.uint8)
    old = np.full(width, NEG)
    new = np.full(width, NEG)
    old[0] = 0.0
    choice[0, 0] = 2
    for c in range(1, width):
        old[c] = old[c - 1] + _w(master, replica, src_i + c, src_j, rate)
        choice[0, c] = 1
    for r in range(1, height):
        j = src_j + r
        for c in range(width):
            if c == 0:
                new[0] = old[0] + _w(master, replica, src_i, j, rate)
                choice[r, 0] = 0
            else:
                left = new[c - 1]
                below = old[c]
                if left >= below:
                    new[c] = left + _w(master, replica, src_i + c, j, rate)
                    choice[r, c] = 1
                else:
                    new[c] = below + _w(master, replica, src_i + c, j, rate)
                    choice[r, c] = 0
        tmp = old
        old = new
        new = tmp
    hits = np.zeros(len(ends_i), dtype=np.uint8)
    for k in range(len(ends_i)):
        hits[k] = 1 if _backtrack_hits(
            choice, src_j, src_i, ends_j[k] - src_j, ends_i[k] - src_i, d_row0, d_col_a, d_col_b
        ) else 0
    return hits


@njit(cache=True)
def two_speed_upper_hits(master, replica, alpha, end_i, end_j, d_row0, d_col_a, d_col_b):
    """Does the maximizer from the upper staircase to (end_i, end_j) touch D?"""
    NEG = -np.inf
    n = end_j
    col_lo = -n
    width = end_i - col_lo + 1
    choice = np.zeros((n + 1, width), dtype=np.uint8)
    old = np.full(width, NEG)
    new = np.full(width, NEG)
    for j in range(1, n + 1):
        r = j
        for c_lat in range(-j, end_i + 1):
            c = c_lat - col_lo
            if c_lat == -j:
                new[c] = 0.0
                choice[r, c] = 2
            else:
                left = new[c - 1]
                below = old[c]
                if left >= below:
                    new[c] = NEG if left == NEG else left + _w(master, replica, c_lat, j, 1.0)
                    choice[r, c] = 1
                else:
                    new[c] = below + _w(master, replica, c_lat, j, 1.0)
                    choice[r, c] = 0
        tmp = old
        old = new
        new = tmp
    return _backtrack_hits(choice, 0, col_lo, end_j, end_i - col_lo, d_row0, d_col_a, d_col_b)


@njit(cache=True)
def two_speed_lower_hits(master, replica, alpha, end_i, end_j, d_row0, d_col_a, d_col_b):
    """Does the maximizer from the lower staircase to (end_i, end_j) touch D?"""
    NEG = -np.inf
    cap = end_i
    row_lo = -cap
    height = end_j - row_lo + 1
    choice = np.zeros((height, cap + 1), dtype=np.uint8)
    old = np.full(cap + 1, NEG)
    new = np.full(cap + 1, NEG)
    for j in range(row_lo, end_j + 1):
        r = j - row_lo
        rate = alpha if j <= 0 else 1.0
        for c in range(0, cap + 1):
            if (j < 0 and c == -j) or (j == 0 and c == 1):
                new[c] = 0.0
                choice[r, c] = 2
            elif c == 0:
                new[c] = NEG
                choice[r, c] = 0
            else:
                left = new[c - 1]
                below = old[c]
                if left >= below:
                    new[c] = NEG if left == NEG else left + _w(master, replica, c, j, rate)
                    choice[r, c] = 1
                else:
                    new[c] = NEG if below == NEG else below + _w(master, replica, c, j, rate)
                    choice[r, c] = 0
        tmp = old
        old = new
        new = tmp
    return _backtrack_hits(choice, row_lo, 0, end_j - row_lo, end_i, d_row0, d_col_a, d_col_b)


@njit(cache=True, parallel=True)
def multipoint_crossing_ensemble(
    master, n_rep, beta_offset, upper_ends_i, upper_ends_j, lower_ends_i, lower_ends_j,
    d_row0, d_col_a, d_col_b,
):
    """Fraction-ready hit flags: does any of the 2m maximizers touch D?"""
    hits = np.zeros(n_rep, dtype=np.uint8)
    for r in prange(n_rep):
        hu = point_source_hits(
            _U(master), _U(r), 1.0, -beta_offset, 0, upper_ends_i, upper_ends_j,
            d_row0, d_col_a, d_col_b,
        )
        hl = point_source_hits(
            _U(master), _U(r), 1.0, 0, -beta_offset, lower_ends_i, lower_ends_j,
            d_row0, d_col_a, d_col_b,
        )
        hits[r] = 1 if (np.any(hu) or np.any(hl)) else 0
    return hits


@njit(cache=True, parallel=True)
def two_speed_crossing_ensemble(
    master, n_rep, alpha, e_col, e_row, ep_col, ep_row, d_row0, d_col_a, d_col_b
):
    hits = np.zeros(n_rep, dtype=np.uint8)
    for r in prange(n_rep):
        hu = two_speed_upper_hits(_U(master), _U(r), alpha, ep_col, ep_row, d_row0, d_col_a, d_col_b)
        hl = two_speed_lower_hits(_U(master), _U(r), alpha, e_col, e_row, d_row0, d_col_a, d_col_b)
        hits[r] = 1 if (hu or hl) else 0
    return hits
