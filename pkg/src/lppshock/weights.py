"""Inhomogeneous exponential-rate environments and reproducible weight windows.

Rate convention
---------------
``exp(v)`` always means *exponential with rate v*, i.e. mean ``1/v``.  The two
conventions (rate vs mean) both occur in the literature on these models; this
package fixes rate semantics everywhere.  A deterministic zero weight (the
corner site of the boundary-induced field) is encoded as ``rate = inf``,
which inversion sampling maps to exactly ``0.0``.

Four environments are supported:

* ``homogeneous(rate)`` - one rate everywhere.
* ``two_speed(alpha)`` - rate 1 on rows ``j > 0``, rate ``alpha < 1`` on rows
  ``j <= 0``.  Rows are TASEP particle labels: the rows ``j <= 0`` are the
  slow particles ahead of the fast ones, which is what creates the shock.
* ``bernoulli_boundary(rho_minus, rho_plus)`` - the corner model with a zero
  weight at the origin, rate ``rho_minus`` on the column ``i = 0``, rate
  ``1 - rho_plus`` on the row ``j = 0`` and rate 1 in the bulk.  Only defined
  on the quadrant ``i, j >= 0`` and only in the shock regime
  ``rho_minus < rho_plus``.
* ``point_to_point(beta)`` - rate 1 everywhere; ``beta`` is the source-offset
  ratio carried along as model metadata.

Sampling is a pure function of ``(field, window, SeedPlan)`` via the
counter-based keys of :mod:`lppshock.rng`, so two replicas never share
stream state and a window can be resampled site-by-site inside streaming
kernels with bit-identical values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lattice import Site, Window
from .rng import DOMAIN_WEIGHT, keys_u01_np, site_keys_np

TWO_SPEED = "two_speed"
BERNOULLI_BOUNDARY = "bernoulli_boundary"
HOMOGENEOUS = "homogeneous"
POINT_TO_POINT = "point_to_point_beta"

#: Rate assigned to deterministic zero-weight sites (mean 1/inf == 0).
ZERO_WEIGHT_RATE = math.inf


class DomainError(ValueError):
    """Site outside the region where the field assigns a rate."""


@dataclass(frozen=True)
class SeedPlan:
    """Reproducibility token: (master seed, replica index) names a stream."""

    master_seed: int
    replica_index: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in 64 bits")
        if self.replica_index < 0:
            raise ValueError("replica_index must be nonnegative")

    def replica(self, index: int) -> "SeedPlan":
        return SeedPlan(self.master_seed, index)


@dataclass(frozen=True)
class RateField:
    """Region-dependent exponential rates; see the module docstring."""

    kind: str
    alpha: Optional[float] = None
    rho_minus: Optional[float] = None
    rho_plus: Optional[float] = None
    rate: Optional[float] = None
    beta: Optional[float] = None

    @staticmethod
    def two_speed(alpha: float) -> "RateField":
        if not (0.0 < alpha < 1.0):
            raise ValueError(f"two_speed requires 0 < alpha < 1, got {alpha}")
        return RateField(TWO_SPEED, alpha=float(alpha))

    @staticmethod
    def bernoulli_boundary(rho_minus: float, rho_plus: float) -> "RateField":
        if not (0.0 < rho_minus < rho_plus < 1.0):
            raise ValueError(
                f"bernoulli_boundary requires 0 < rho_minus < rho_plus < 1 "
                f"(shock regime), got ({rho_minus}, {rho_plus})"
            )
        return RateField(BERNOULLI_BOUNDARY, rho_minus=float(rho_minus), rho_plus=float(rho_plus))

    @staticmethod
    def homogeneous(rate: float) -> "RateField":
        if not rate > 0.0:
            raise ValueError(f"rate must be positive, got {rate}")
        return RateField(HOMOGENEOUS, rate=float(rate))

    @staticmethod
    def point_to_point(beta: float) -> "RateField":
        if not beta > 0.0:
            raise ValueError(f"beta must be positive, got {beta}")
        return RateField(POINT_TO_POINT, rate=1.0, beta=float(beta))


def rate_at(field: RateField, site: Site) -> float:
    """Exponential rate at ``site``; ``inf`` flags a deterministic zero weight.

    For the staircase models the start-set sites never contribute to a
    passage sum, so the row rule applied there is inconsequential.
    """
    i, j = site
    if field.kind == HOMOGENEOUS or field.kind == POINT_TO_POINT:
        return field.rate
    if field.kind == TWO_SPEED:
        return 1.0 if j > 0 else field.alpha
    if field.kind == BERNOULLI_BOUNDARY:
        if i < 0 or j < 0:
            raise DomainError(f"bernoulli_boundary field has no rate at {site}")
        if i == 0 and j == 0:
            return ZERO_WEIGHT_RATE
        if i == 0:
            return field.rho_minus
        if j == 0:
            return 1.0 - field.rho_plus
        return 1.0
    raise ValueError(f"unknown field kind {field.kind!r}")


def is_zero_weight(field: RateField, site: Site) -> bool:
    return rate_at(field, site) == ZERO_WEIGHT_RATE


def rate_array(field: RateField, window: Window) -> np.ndarray:
    """Rates for every site of ``window``, indexed [i-imin, j-jmin]."""
    ni, nj = window.shape
    out = np.empty((ni, nj))
    for j in range(window.jmin, window.jmax + 1):
        # rows are constant-rate for every supported field except in the
        # bernoulli case, whose column i=0 breaks the pattern
        if field.kind == BERNOULLI_BOUNDARY:
            for i in range(window.imin, window.imax + 1):
                out[i - window.imin, j - window.jmin] = rate_at(field, (i, j))
        else:
            out[:, j - window.jmin] = rate_at(field, (window.imin, j))
    return out


@dataclass(frozen=True)
class WeightSample:
    """One realized weight environment on a window.

    ``values[i - imin, j - jmin]`` is the weight at site ``(i, j)``.  The
    array is a deterministic function of ``(field, window, plan)``.
    """

    field: RateField
    window: Window
    plan: SeedPlan
    values: np.ndarray

    def value(self, site: Site) -> float:
        a, b = self.window.index(site)
        return float(self.values[a, b])

    def covers(self, window: Window) -> bool:
        return self.window.covers(window)


def sample_weights(field: RateField, window: Window, plan: SeedPlan) -> WeightSample:
    """Draw independent exponentials, one per window site.

    Inversion from the keyed uniform at each site: weight = -log(u)/rate.
    Zero-weight sites (rate inf) come out exactly 0.
    """
    rates = rate_array(field, window)
    ii = np.arange(window.imin, window.imax + 1, dtype=np.int64)
    jj = np.arange(window.jmin, window.jmax + 1, dtype=np.int64)
    keys = site_keys_np(
        plan.master_seed,
        plan.replica_index,
        DOMAIN_WEIGHT,
        np.broadcast_to(ii[:, None], rates.shape).copy(),
        np.broadcast_to(jj[None, :], rates.shape).copy(),
    )
    u = keys_u01_np(keys)
    values = -np.log(u) / rates
    return WeightSample(field=field, window=window, plan=plan, values=values)
