"""Assumption and consistency checks behind the limit theorems.

These are the runnable counterparts of the reduction steps: maximizers of
the two cluster problems should avoid a common diagonal point set with
frequency -> 0 (no-crossing), the passage time should split additively
across a characteristic point up to o(t^{1/3}) (slow decorrelation), the
point-to-point tails should decay at their stated exponent classes, and the
particle/passage-time correspondence should hold pathwise, with the
event-driven simulator as the oracle.
"""

from __future__ import annotations

import math
import random
import time
from typing import Dict, List, Tuple

import numba
import numpy as np

from ..lattice import Window
from ..lpp import NEG_INF
from ..stats import EmpiricalSample, ks_distance
from ..tasep import ParticleConfig, event_driven_jump_table, evolve_from_weights
from ..twdist import johansson_constants
from ..weights import RateField, SeedPlan, sample_weights
from . import kernels
from .config import ExperimentConfig


def _set_threads(cfg: ExperimentConfig) -> None:
    if cfg.threads:
        numba.set_num_threads(cfg.threads)


def crossing_target_set(t: int, gamma_max: float, ray_col: int, ray_row: int) -> Tuple[int, np.ndarray, np.ndarray]:
    """Lattice points (floor(gamma ray_col), floor(gamma ray_row)), gamma in [0, gamma_max].

    Returns (row0, col_a, col_b): for each integer row r = row0 + k the set
    contains the columns col_a[k]..col_b[k] (at most two distinct values for
    the near-diagonal rays used here; col_b repeats col_a when only one).
    """
    r_max = int(math.floor(gamma_max * ray_row))
    col_a = np.full(r_max + 1, -(10**9), dtype=np.int64)
    col_b = np.full(r_max + 1, -(10**9), dtype=np.int64)
    for r in range(r_max + 1):
        g_lo = r / ray_row
        g_hi = min((r + 1) / ray_row, gamma_max)
        a = int(math.floor(g_lo * ray_col))
        b = int(math.floor(g_hi * ray_col))
        # gamma = (r+1)/ray_row belongs to the next row except when clipped
        if g_hi < (r + 1) / ray_row:
            hi = b
        else:
            hi = int(math.floor((g_hi - 1e-12) * ray_col))
        col_a[r] = a
        col_b[r] = max(a, hi)
    return 0, col_a, col_b


def check_no_crossing(cfg: ExperimentConfig, model: str = "multipoint") -> Dict:
    """Frequency of maximizers touching the diagonal target set, at t and t_low.

    The frequency must be nonincreasing from the smaller to the larger scale
    within two Monte Carlo standard errors.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    out: Dict = {"experiment": "no_crossing", "model": model, "config": cfg.to_dict(), "scales": []}
    for t in (cfg.t_secondary, int(cfg.t)):
        tn = int(round(t**cfg.nu))
        if model == "multipoint":
            beta = cfg.beta
            u = np.asarray(cfg.u_offsets)
            b_off = int(math.floor(beta * t))
            gamma_max = 1.0 - t ** (cfg.nu - 1.0) * (1.0 + beta / 2.0)
            p_cols = np.array(
                [int(math.floor(t + uk * t ** (1.0 / 3.0))) for uk in u], dtype=np.int64
            )
            p_rows = np.full(len(u), t, dtype=np.int64)
            # E_k+ on the segment from the upper source to P_k, a t^nu rise early
            ep_rows = np.full(len(u), t - tn, dtype=np.int64)
            ep_cols = np.array(
                [
                    int(math.floor(-b_off + (pc + b_off) * (t - tn) / t))
                    for pc in p_cols
                ],
                dtype=np.int64,
            )
            row0, dca, dcb = crossing_target_set(t, gamma_max, int(p_cols[-1]), t)
            hits = kernels.multipoint_crossing_ensemble(
                cfg.master_seed, cfg.n_replicas, b_off, ep_cols, ep_rows, p_cols, p_rows,
                row0, dca, dcb,
            )
        elif model == "two_speed":
            eta0 = cfg.alpha / (2.0 - cfg.alpha)
            e_col = int(math.floor(eta0 * t))
            gamma_max = 1.0 - t ** (cfg.assumption_exponent - 1.0)
            row0, dca, dcb = crossing_target_set(t, gamma_max, e_col, t)
            hits = kernels.two_speed_crossing_ensemble(
                cfg.master_seed, cfg.n_replicas, cfg.alpha,
                e_col, t, e_col - tn, t - tn, row0, dca, dcb,
            )
        else:
            raise ValueError(f"unknown model {model!r}")
        freq = float(np.mean(hits))
        se = math.sqrt(max(freq * (1.0 - freq), 1.0 / cfg.n_replicas) / cfg.n_replicas)
        out["scales"].append({"t": t, "frequency": freq, "standard_error": se, "replicas": int(cfg.n_replicas)})
    lo, hi = out["scales"]
    out["nonincreasing_within_2se"] = hi["frequency"] <= lo["frequency"] + 2.0 * math.hypot(
        lo["standard_error"], hi["standard_error"]
    )
    out["seconds"] = time.perf_counter() - t0
    return out


def check_slow_decorrelation(cfg: ExperimentConfig) -> Dict:
    """Additivity gap across the characteristic point E+ at two scales.

    Delta = (L_{S+ -> E} - L_{S+ -> E+} - L_{E+ -> E}) / t^{1/3} >= 0
    pathwise by the junction convention (up to float roundoff); its mean and
    0.95-quantile must shrink from t_low to t.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    out: Dict = {"experiment": "slow_decorrelation", "config": cfg.to_dict(), "scales": []}
    for t in (cfg.t_secondary, int(cfg.t)):
        tn = int(round(t**cfg.nu))
        vals = kernels.slow_decorrelation_ensemble(cfg.master_seed, cfg.n_replicas, cfg.alpha, t, tn)
        delta = (vals[:, 0] - vals[:, 1] - vals[:, 2]) / t ** (1.0 / 3.0)
        out["scales"].append(
            {
                "t": t,
                "t_nu": tn,
                "mean": float(np.mean(delta)),
                "q95": float(np.quantile(delta, 0.95)),
                "min": float(np.min(delta)),
                "se_mean": float(np.std(delta, ddof=1) / math.sqrt(len(delta))),
                "replicas": int(cfg.n_replicas),
            }
        )
    lo, hi = out["scales"]
    out["pathwise_nonnegative"] = min(lo["min"], hi["min"]) >= -1e-8
    out["mean_shrinks_within_2se"] = hi["mean"] <= lo["mean"] + 2.0 * math.hypot(lo["se_mean"], hi["se_mean"])
    out["q95_shrinks"] = hi["q95"] <= lo["q95"] + 2.0 * math.hypot(lo["se_mean"], hi["se_mean"])
    out["seconds"] = time.perf_counter() - t0
    return out


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def check_tails(cfg: ExperimentConfig) -> Dict:
    """Upper/lower tail exceedance frequencies of the point-to-point time.

    With L ~ mu_pp l + sigma_eta l^{1/3} X in the limit, the upper tail
    P(X-scale > s) decays at exponent class s (bound) / s^{3/2} (true), the
    lower at |s|^{3/2} (bound) / |s|^3 (true).  At desk scale the raw
    log-frequency of the *lower* tail is flatter (it starts from the bulk),
    so "steeper" is tested on the decay powers: the fitted exponent p in
    -log P ~ |s|^p must be larger for the lower tail.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    ell = int(cfg.t)
    eta = cfg.eta
    mu_pp, _sigma = johansson_constants(eta)
    x_end = int(math.floor(eta * ell))
    L = kernels.point_to_point_ensemble(cfg.master_seed, cfg.n_replicas, 1.0, x_end, ell)
    resc = (L - mu_pp * ell) / ell ** (1.0 / 3.0)

    s_up = np.arange(2.0, 8.0 + 1e-9, 0.5)
    s_lo = np.arange(2.0, 8.0 + 1e-9, 0.5)
    up_freq = np.array([float(np.mean(resc > s)) for s in s_up])
    lo_freq = np.array([float(np.mean(resc <= -s)) for s in s_lo])

    def exponent_and_slope(svals, freqs, transform_pow):
        n = cfg.n_replicas
        keep = freqs * n >= 10  # at least 10 hits for a usable log-frequency
        s = svals[keep]
        f = freqs[keep]
        if len(s) < 3:
            return {"usable_points": int(len(s))}
        lam = -np.log(f)
        return {
            "usable_points": int(len(s)),
            "slope_vs_stated": _fit_slope(s**transform_pow, np.log(f)),
            "decay_power": _fit_slope(np.log(s), np.log(lam)),
            "strictly_decreasing": bool(np.all(np.diff(f) < 0)),
        }

    up = exponent_and_slope(s_up, up_freq, 1.0)  # stated upper bound: exp(-c s)
    lo = exponent_and_slope(s_lo, lo_freq, 1.5)  # stated lower bound: exp(-c |s|^{3/2})

    out = {
        "experiment": "tails",
        "config": cfg.to_dict(),
        "mu_pp": mu_pp,
        "mean_over_ell": float(np.mean(L) / ell),
        "mean_over_ell_gap": abs(float(np.mean(L) / ell) - mu_pp),
        "upper": {"s": s_up.tolist(), "frequency": up_freq.tolist(), **up},
        "lower": {"s": (-s_lo).tolist(), "frequency": lo_freq.tolist(), **lo},
        "seconds": time.perf_counter() - t0,
    }
    if "decay_power" in up and "decay_power" in lo:
        out["lower_power_exceeds_upper"] = lo["decay_power"] > up["decay_power"]
        out["slopes_negative"] = up["slope_vs_stated"] < 0 and lo["slope_vs_stated"] < 0
    return out


def check_local_increments(cfg: ExperimentConfig) -> Dict:
    """Local passage-time increments along a ray: slope mu_s = 1 + s^{-1/2}.

    The recentred increment (L(st + u t^{1/3}, t) - mu_s * dc - L(st, t)) /
    t^{1/3} must have shrinking absolute mean as t grows.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    s_ray, u = 2.0, 1.0
    mu_s = 1.0 + s_ray**-0.5
    out: Dict = {"experiment": "local_increments", "config": cfg.to_dict(), "s": s_ray, "u": u, "scales": []}
    for t in (cfg.t_secondary, int(cfg.t)):
        c_base = int(math.floor(s_ray * t))
        c_shift = int(math.floor(s_ray * t + u * t ** (1.0 / 3.0)))
        vals = kernels.local_increment_ensemble(cfg.master_seed, cfg.n_replicas, 1.0, c_base, c_shift, t)
        dc = c_shift - c_base
        v = (vals[:, 1] - mu_s * dc - vals[:, 0]) / t ** (1.0 / 3.0)
        out["scales"].append(
            {
                "t": t,
                "mean_abs": float(np.mean(np.abs(v))),
                "se": float(np.std(np.abs(v), ddof=1) / math.sqrt(len(v))),
                "replicas": int(cfg.n_replicas),
            }
        )
    lo, hi = out["scales"]
    out["mean_abs_shrinks_within_2se"] = hi["mean_abs"] <= lo["mean_abs"] + 2.0 * math.hypot(lo["se"], hi["se"])
    out["seconds"] = time.perf_counter() - t0
    return out


def run_correspondence(cfg: ExperimentConfig) -> Dict:
    """Pathwise particle/passage-time correspondence with the event oracle.

    For each replica the max-plus jump table must equal the event-driven one
    bitwise, and the indicator identity {x_n(t) >= m - n} = {T(m,n) <= t}
    must hold at every probe.  Any violation is a hard failure.
    """
    t0 = time.perf_counter()
    size = int(cfg.window_size)
    window = Window(0, size - 1, 0, size - 1)
    positions = {k: -k for k in range(0, size)}  # fully packed step profile
    config = ParticleConfig(positions=positions)
    field = RateField.homogeneous(1.0)
    rng = random.Random(cfg.master_seed)
    mismatches = 0
    violations = 0
    probes = 0
    for rep in range(cfg.n_replicas):
        plan = SeedPlan(cfg.master_seed, rep)
        weights = sample_weights(field, window, plan)
        fast = evolve_from_weights(config, weights, window)
        oracle = event_driven_jump_table(config, weights, window)
        if not np.array_equal(fast.grid.times, oracle.grid.times):
            mismatches += 1
        tmax = float(np.max(oracle.grid.times[np.isfinite(oracle.grid.times)]))
        for _ in range(cfg.probes_per_replica):
            m = rng.randint(0, size - 1)
            n = rng.randint(0, size - 1)
            t_probe = rng.random() * tmax * 1.1
            probes += 1
            if not oracle.holds_correspondence(m, n, t_probe):
                violations += 1
        # time-zero probe: behind-the-staircase coordinates are occupied
        if not oracle.holds_correspondence(0, 0, 0.0):
            violations += 1
        probes += 1
    return {
        "experiment": "correspondence",
        "config": cfg.to_dict(),
        "replicas": int(cfg.n_replicas),
        "probes": probes,
        "table_mismatches": mismatches,
        "indicator_violations": violations,
        "seconds": time.perf_counter() - t0,
    }


CHECKS = {
    "no_crossing": check_no_crossing,
    "slow_decorrelation": check_slow_decorrelation,
    "tails": check_tails,
    "correspondence": run_correspondence,
}
