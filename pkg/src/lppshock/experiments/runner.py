"""Theorem-scale ensemble experiments.

Each runner draws N interface / passage-time replicas with the streaming
kernels, rescales them with the exact theorem centerings, and compares the
empirical distribution against the numerically evaluated limit law.  The
per-replica statistic vector is ordered by replica index, so reports are a
pure function of (config, master seed) regardless of thread count.

Replicas whose interface would leave the pruned column band rerun with a
doubled margin (deterministically: same keys, same weights); exact color
ties abort the replica and are surfaced as an environment-bug flag.
"""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numba
import numpy as np

from .. import twdist
from ..stats import EmpiricalSample, dkw_bound, ecdf_curve, ks_distance, pearson_correlation
from . import kernels
from .config import ExperimentConfig
from .report import write_csv, write_report

DEFAULT_MARGIN_SCALE = 24
MAX_MARGIN_DOUBLINGS = 4


def _set_threads(cfg: ExperimentConfig) -> None:
    if cfg.threads:
        numba.set_num_threads(cfg.threads)


def default_margin(n: int) -> int:
    # interface transversal fluctuations are O(n^{1/3}); two dozen of them
    # make overflow astronomically unlikely while keeping the band thin
    return 64 + DEFAULT_MARGIN_SCALE * int(math.ceil(n ** (1.0 / 3.0)))


def _trace_ensemble_with_retry(
    ensemble_fn: Callable,
    trace_fn: Callable,
    master: int,
    n_rep: int,
    model_args: tuple,
    n: int,
) -> Tuple[np.ndarray, int]:
    """Run an interface ensemble; retry overflowed replicas with wider bands.

    Returns (final interface columns, tie count).  Tied replicas keep a -1
    marker and are excluded from the statistics by the caller.
    """
    margin = default_margin(n)
    i_final, status = ensemble_fn(master, n_rep, *model_args, n, margin)
    ties = int(np.sum(status == kernels.STATUS_TIE))
    for r in np.nonzero(status == kernels.STATUS_OVERFLOW)[0]:
        m = margin
        for _ in range(MAX_MARGIN_DOUBLINGS):
            m *= 2
            ip, _, st = trace_fn(np.uint64(master), np.uint64(r), *model_args, n, m)
            if st == kernels.STATUS_OK:
                i_final[r] = ip[n]
                status[r] = kernels.STATUS_OK
                break
            if st == kernels.STATUS_TIE:
                status[r] = kernels.STATUS_TIE
                ties += 1
                break
        else:
            raise RuntimeError(f"replica {r}: interface escaped a {m}-wide margin")
    i_final = np.where(status == kernels.STATUS_OK, i_final, -1)
    return i_final, ties


def _ecdf_vs_prediction(
    sample: EmpiricalSample, predicted: Callable, grid: np.ndarray
) -> Dict[str, list]:
    emp = ecdf_curve(sample, grid)
    pred = np.asarray([predicted(float(s)) for s in grid])
    return {
        "grid": [float(g) for g in grid],
        "empirical": [float(v) for v in emp],
        "predicted": [float(v) for v in pred],
    }


def _ks_between_ecdfs(a: np.ndarray, b: np.ndarray) -> float:
    pts = np.concatenate([a, b])
    fa = np.searchsorted(np.sort(a), pts, side="right") / len(a)
    fb = np.searchsorted(np.sort(b), pts, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


class ExperimentReport:
    """Report payload plus canonical writers."""

    def __init__(self, data: dict, samples: List[Tuple[int, float]], ecdf_table: dict, timings: dict):
        self.data = data
        self.samples = samples
        self.ecdf_table = ecdf_table
        self.timings = timings

    def write(self, out_dir: str | Path) -> Path:
        path = write_report(self.data, out_dir, self.timings)
        out = Path(out_dir)
        if self.ecdf_table:
            write_csv(
                out / "ecdf.csv",
                ["s", "empirical", "predicted"],
                zip(self.ecdf_table["grid"], self.ecdf_table["empirical"], self.ecdf_table["predicted"]),
            )
        if self.samples:
            write_csv(out / "samples.csv", ["replica", "statistic"], self.samples)
        return path


def run_two_speed(cfg: ExperimentConfig) -> ExperimentReport:
    """Interface fluctuation ensemble for the two-speed staircase model.

    Statistic: (I_t - J_t - (alpha - 1) t) / t^{1/3}; limit CDF from the
    independent GOE-law difference (increasing in s).
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    n = int(cfg.t)
    i_final, ties = _trace_ensemble_with_retry(
        kernels.two_speed_ensemble, kernels.two_speed_trace,
        cfg.master_seed, cfg.n_replicas, (cfg.alpha,), n,
    )
    t_kernel = time.perf_counter() - t0
    ok = i_final >= 0
    stats = (2.0 * i_final[ok] - n - (cfg.alpha - 1.0) * n) / n ** (1.0 / 3.0)
    sample = EmpiricalSample(values=stats, provenance=tuple(np.nonzero(ok)[0].tolist()))

    params = twdist.ShockLawParams.from_alpha(cfg.alpha)
    dense = np.arange(-16.0, 16.0 + 1e-9, 0.04)
    curve = twdist.NumericCDF(grid=dense, values=np.asarray(twdist.two_speed_prediction(params, dense)))
    ks = ks_distance(sample, curve)
    table = _ecdf_vs_prediction(sample, curve.cdf, np.asarray(cfg.s_grid))

    # declared-tolerance sensitivity report for o(t^{1/3}) recentering:
    # shifting by a_t = t^{1/4} moves the ECDF by a_t/t^{1/3} = t^{-1/12},
    # which is still 0.5 at desk scale, so this is a reported diagnostic
    # (expected ~ peak density * shift), not a pass/fail gate
    a_t = n**0.25
    recenter_ks = _ks_between_ecdfs(stats, stats - a_t / n ** (1.0 / 3.0))

    data = {
        "experiment": "two_speed",
        "config": cfg.to_dict(),
        "law": {
            "eta0": params.eta0, "mu": params.mu, "sigma1": params.sigma1,
            "sigma2": params.sigma2, "gamma": params.gamma,
        },
        "replicas": int(cfg.n_replicas),
        "tie_count": ties,
        "environment_bug": ties > 0,
        "ks_distance": ks,
        "dkw_99": dkw_bound(sample.size, 0.99),
        "recenter_shift": a_t / n ** (1.0 / 3.0),
        "recenter_ks": recenter_ks,
        "sample_mean": float(np.mean(stats)),
        "sample_sd": float(np.std(stats, ddof=1)),
        "ecdf_table": table,
    }
    timings = {"kernel_seconds": t_kernel, "total_seconds": time.perf_counter() - t0}
    samples = [(int(r), float(v)) for r, v in zip(np.nonzero(ok)[0], stats)]
    return ExperimentReport(data, samples, table, timings)


def run_bernoulli(cfg: ExperimentConfig) -> ExperimentReport:
    """Interface fluctuation ensemble for the random-boundary corner model.

    Statistic: the shock coordinate u* with
    I - J = -t(1-eta)/(1+eta) + 2 u* t^{1/2} / (1+eta)^{3/2}; the limit is
    the Gaussian tail law with drift m+ - m- and variance v+ + v-.
    Also checks the one-point marginals of the rescaled cluster passage
    times against N(m_pm u, v_pm) on a sub-ensemble.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    n = int(cfg.t)
    i_final, ties = _trace_ensemble_with_retry(
        kernels.bernoulli_ensemble, kernels.bernoulli_trace,
        cfg.master_seed, cfg.n_replicas, (cfg.rho_minus, cfg.rho_plus), n,
    )
    t_kernel = time.perf_counter() - t0
    params = twdist.BernoulliLawParams.from_densities(cfg.rho_minus, cfg.rho_plus)
    eta = params.eta
    ok = i_final >= 0
    imj = 2.0 * i_final[ok] - n
    drift = -n * (1.0 - eta) / (1.0 + eta)
    stats = (imj - drift) * (1.0 + eta) ** 1.5 / (2.0 * n**0.5)
    sample = EmpiricalSample(values=stats, provenance=tuple(np.nonzero(ok)[0].tolist()))

    predicted = lambda u: twdist.bernoulli_prediction(params, u)
    ks = ks_distance(sample, predicted)
    grid = np.asarray(cfg.u_grid)
    table = _ecdf_vs_prediction(sample, predicted, grid)
    value_at_zero = float(np.mean(stats <= 0.0))

    # one-point marginals of the rescaled passage times at u = 0
    t1 = time.perf_counter()
    n_marg = int(cfg.n_marginal_replicas)
    x_end = int(math.floor(eta * n))
    lpm = kernels.bernoulli_endpoint_ensemble(
        cfg.master_seed + 1, n_marg, cfg.rho_minus, cfg.rho_plus, n, x_end
    )
    center = n / (cfg.rho_plus * cfg.rho_minus)
    resc_p = (lpm[:, 0] - center) / n**0.5
    resc_m = (lpm[:, 1] - center) / n**0.5
    ks_p = ks_distance(
        EmpiricalSample(values=resc_p), lambda s: twdist.gaussian_cdf(s, 0.0, params.v_plus)
    )
    ks_m = ks_distance(
        EmpiricalSample(values=resc_m), lambda s: twdist.gaussian_cdf(s, 0.0, params.v_minus)
    )
    t_marg = time.perf_counter() - t1

    data = {
        "experiment": "bernoulli",
        "config": cfg.to_dict(),
        "law": {
            "eta": eta, "v_plus": params.v_plus, "v_minus": params.v_minus,
            "m_plus": params.m_plus, "m_minus": params.m_minus,
        },
        "replicas": int(cfg.n_replicas),
        "tie_count": ties,
        "environment_bug": ties > 0,
        "ks_distance": ks,
        "dkw_99": dkw_bound(sample.size, 0.99),
        "value_at_zero": value_at_zero,
        "marginals": {
            "replicas": n_marg,
            "ks_plus_vs_gaussian": ks_p,
            "ks_minus_vs_gaussian": ks_m,
            "mean_plus": float(np.mean(resc_p)),
            "mean_minus": float(np.mean(resc_m)),
        },
        "sample_mean": float(np.mean(stats)),
        "sample_sd": float(np.std(stats, ddof=1)),
        "ecdf_table": table,
    }
    timings = {
        "kernel_seconds": t_kernel,
        "marginal_seconds": t_marg,
        "total_seconds": time.perf_counter() - t0,
    }
    samples = [(int(r), float(v)) for r, v in zip(np.nonzero(ok)[0], stats)]
    return ExperimentReport(data, samples, table, timings)


def run_multipoint(cfg: ExperimentConfig) -> ExperimentReport:
    """Joint passage-time law at several endpoints around the shock line.

    Per replica, passage times from both sources to every endpoint
    P_k = (t + u_k t^{1/3}, t); the joint rescaled CDF is compared with the
    product of the two GUE factors, and the cross-source correlation of the
    rescaled times checks the asymptotic independence.
    """
    _set_threads(cfg)
    t0 = time.perf_counter()
    t = int(cfg.t)
    u = np.asarray(cfg.u_offsets)
    params = twdist.MultipointLawParams.from_beta(cfg.beta)
    b_off = int(math.floor(cfg.beta * t))
    end_cols = np.array([int(math.floor(t + uk * t ** (1.0 / 3.0))) for uk in u], dtype=np.int64)
    raw = kernels.multipoint_ensemble(cfg.master_seed, cfg.n_replicas, b_off, t, end_cols)
    t_kernel = time.perf_counter() - t0

    t13 = t ** (1.0 / 3.0)
    resc_p = (raw[:, 0, :] - params.mu * t) / t13
    resc_m = (raw[:, 1, :] - params.mu * t) / t13
    resc_max = np.maximum(resc_p, resc_m)

    m = len(u)
    grid = [float(s) for s in cfg.joint_grid]
    joint = []
    if m >= 2:
        for s1 in grid:
            for s2 in grid:
                emp = float(np.mean((resc_max[:, 0] <= s1) & (resc_max[:, 1] <= s2)))
                pred = twdist.multipoint_prediction(params, u[:2], (s1, s2))
                joint.append({"s1": s1, "s2": s2, "empirical": emp, "predicted": pred, "gap": abs(emp - pred)})
    correlations = [
        pearson_correlation(resc_p[:, k], resc_m[:, k]) for k in range(m)
    ]

    gue = twdist.gue_law()
    one_point = lambda s: np.asarray(
        gue.cdf((np.asarray(s) - params.mu_plus * u[0]) / params.sigma)
    ) * np.asarray(gue.cdf((np.asarray(s) - params.mu_minus * u[0]) / params.sigma))
    marg_sample = EmpiricalSample(values=resc_max[:, 0])
    ks_marginal = ks_distance(marg_sample, one_point)
    table = _ecdf_vs_prediction(marg_sample, one_point, np.asarray(cfg.s_grid))

    data = {
        "experiment": "multipoint",
        "config": cfg.to_dict(),
        "law": {
            "mu": params.mu, "mu_plus": params.mu_plus,
            "mu_minus": params.mu_minus, "sigma": params.sigma,
        },
        "replicas": int(cfg.n_replicas),
        "joint_cdf": joint,
        "max_joint_gap": max((row["gap"] for row in joint), default=0.0),
        "cross_source_correlation": [float(c) for c in correlations],
        "ks_marginal_k1": ks_marginal,
        "dkw_99": dkw_bound(cfg.n_replicas, 0.99),
        "ecdf_table": table,
    }
    timings = {"kernel_seconds": t_kernel, "total_seconds": time.perf_counter() - t0}
    samples = [(int(r), float(v)) for r, v in enumerate(resc_max[:, 0])]
    return ExperimentReport(data, samples, table, timings)


RUNNERS = {
    "two_speed": run_two_speed,
    "bernoulli": run_bernoulli,
    "multipoint": run_multipoint,
}
