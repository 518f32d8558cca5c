"""Empirical-distribution machinery for the ensemble experiments.

Samples are kept in a canonical sorted form so that merging replica batches
is a commutative, associative reduction: merging in any order produces the
identical multiset and therefore identical statistics, which is what makes
parallel ensemble runs byte-reproducible.

The KS distance is evaluated at the sample's own jump points against a
continuous model CDF, checking both one-sided gaps at each jump; for a
right-continuous ECDF against a continuous model this supremum is exact.
No p-values are attached: the experiments declare fixed tolerances built
from the DKW bound plus a stated finite-size slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple, Union

import numpy as np

CDFLike = Union[Callable[[np.ndarray], np.ndarray], "object"]


class EmptySampleError(ValueError):
    pass


class DegenerateSampleError(ValueError):
    pass


@dataclass(frozen=True)
class EmpiricalSample:
    """Sorted multiset of real statistics with replica provenance."""

    values: np.ndarray
    provenance: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        v = np.sort(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", tuple(sorted(self.provenance)))

    @property
    def size(self) -> int:
        return len(self.values)

    def merge(self, other: "EmpiricalSample") -> "EmpiricalSample":
        return EmpiricalSample(
            values=np.concatenate([self.values, other.values]),
            provenance=self.provenance + other.provenance,
        )


def merge_all(batches: Sequence[EmpiricalSample]) -> EmpiricalSample:
    out = EmpiricalSample(values=np.empty(0))
    for b in batches:
        out = out.merge(b)
    return out


def ecdf(sample: EmpiricalSample, s: float) -> float:
    """Fraction of sample values <= s."""
    if sample.size == 0:
        raise EmptySampleError("ecdf of an empty sample")
    return float(np.searchsorted(sample.values, s, side="right")) / sample.size


def ecdf_curve(sample: EmpiricalSample, grid: np.ndarray) -> np.ndarray:
    if sample.size == 0:
        raise EmptySampleError("ecdf of an empty sample")
    return np.searchsorted(sample.values, grid, side="right") / sample.size


def _model_values(model: CDFLike, x: np.ndarray) -> np.ndarray:
    cdf = getattr(model, "cdf", model)
    return np.asarray(cdf(x), dtype=float)


def ks_distance(sample: EmpiricalSample, model: CDFLike) -> float:
    """sup over sample jump points of |ECDF - model|, both one-sided gaps."""
    if sample.size == 0:
        raise EmptySampleError("ks_distance of an empty sample")
    x = sample.values
    n = sample.size
    F = _model_values(model, x)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - F), np.max(F - lo), 0.0))


def dkw_bound(n: int, confidence: float = 0.99) -> float:
    """Two-sided DKW band halfwidth: P(sup|ECDF - F| > eps) <= alpha."""
    alpha = 1.0 - confidence
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def pearson_correlation(x: Sequence[float], y: Sequence[float], paired: bool = True) -> float:
    """Standard paired correlation in [-1, 1]."""
    if not paired:
        raise ValueError("only paired correlation is defined")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if len(xa) != len(ya) or len(xa) < 2:
        raise ValueError("need equal lengths >= 2")
    sx = xa.std()
    sy = ya.std()
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSampleError("zero variance in correlation input")
    r = float(np.mean((xa - xa.mean()) * (ya - ya.mean())) / (sx * sy))
    return max(-1.0, min(1.0, r))
