"""Experiment configuration: a flat, JSON-compatible key-value schema.

Every run is a pure function of its configuration (including the master
seed), so the config echo inside a report is enough to reproduce it.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

EXPERIMENTS = (
    "two_speed",
    "bernoulli",
    "multipoint",
    "no_crossing",
    "slow_decorrelation",
    "tails",
    "correspondence",
)


@dataclass
class ExperimentConfig:
    """Flat config; unused fields stay at their defaults for an experiment."""

    experiment: str
    t: int = 500
    n_replicas: int = 1000
    master_seed: int = 20170401
    threads: int = 0  # 0: leave the numba default (all cores)

    # model parameters
    alpha: float = 0.5
    rho_minus: float = 0.25
    rho_plus: float = 0.75
    beta: float = 1.0
    eta: float = 1.0  # aspect ratio for the tails experiment

    # scaling / geometry knobs
    nu: float = 0.6
    assumption_exponent: float = 0.5  # crossing-set exponent for the staircase model
    t_low: int = 0  # secondary scale for decreasing-in-t checks; 0: t // 4

    # evaluation grids
    s_grid: List[float] = field(default_factory=lambda: [round(-8.0 + 0.5 * k, 3) for k in range(33)])
    u_grid: List[float] = field(default_factory=lambda: [round(-6.0 + 0.5 * k, 3) for k in range(25)])
    u_offsets: List[float] = field(default_factory=lambda: [-1.0, 1.0])
    joint_grid: List[float] = field(default_factory=lambda: [-4.0, -1.0, 2.0])

    # secondary ensemble sizes
    n_marginal_replicas: int = 2500
    probes_per_replica: int = 50
    window_size: int = 30

    out_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.experiment != "correspondence" and self.t < 50:
            raise ValueError("t must be at least 50")
        if self.n_replicas < 1:
            raise ValueError("n_replicas must be at least 1")
        if not (1.0 / 3.0 < self.nu < 1.0):
            raise ValueError("nu must lie in (1/3, 1)")
        if not (0.0 < self.assumption_exponent < self.nu):
            raise ValueError("assumption_exponent must lie in (0, nu)")
        if self.experiment == "two_speed" and not (0.0 < self.alpha < 1.0):
            raise ValueError("two_speed requires 0 < alpha < 1")
        if self.experiment in ("bernoulli",) and not (0.0 < self.rho_minus < self.rho_plus < 1.0):
            raise ValueError("bernoulli requires the shock regime 0 < rho- < rho+ < 1")
        if self.experiment == "multipoint":
            u = self.u_offsets
            if len(u) < 1 or len(u) > 4:
                raise ValueError("multipoint supports 1 to 4 offsets")
            if any(b <= a for a, b in zip(u, u[1:])):
                raise ValueError("u offsets must be strictly increasing")

    @property
    def t_secondary(self) -> int:
        return self.t_low if self.t_low else max(50, self.t // 4)

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        return ExperimentConfig(**d)

    @staticmethod
    def from_file(path: str | Path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
