"""Small lattice helpers shared by the weight, passage-time and interface code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Tuple

Site = Tuple[int, int]

STEP_RIGHT: Site = (1, 0)
STEP_UP: Site = (0, 1)


@dataclass(frozen=True)
class Window:
    """Inclusive rectangle of lattice sites [imin..imax] x [jmin..jmax]."""

    imin: int
    imax: int
    jmin: int
    jmax: int

    def __post_init__(self) -> None:
        if self.imax < self.imin or self.jmax < self.jmin:
            raise ValueError(f"empty window {self}")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.imax - self.imin + 1, self.jmax - self.jmin + 1)

    @property
    def nsites(self) -> int:
        ni, nj = self.shape
        return ni * nj

    def contains(self, site: Site) -> bool:
        i, j = site
        return self.imin <= i <= self.imax and self.jmin <= j <= self.jmax

    def covers(self, other: "Window") -> bool:
        return (
            self.imin <= other.imin
            and self.imax >= other.imax
            and self.jmin <= other.jmin
            and self.jmax >= other.jmax
        )

    def sites(self) -> Iterator[Site]:
        for j in range(self.jmin, self.jmax + 1):
            for i in range(self.imin, self.imax + 1):
                yield (i, j)

    def index(self, site: Site) -> Tuple[int, int]:
        if not self.contains(site):
            raise KeyError(f"site {site} outside window {self}")
        return (site[0] - self.imin, site[1] - self.jmin)

    @staticmethod
    def bounding(sites) -> "Window":
        sites = list(sites)
        if not sites:
            raise ValueError("no sites to bound")
        ii = [s[0] for s in sites]
        jj = [s[1] for s in sites]
        return Window(min(ii), max(ii), min(jj), max(jj))

    def union(self, other: "Window") -> "Window":
        return Window(
            min(self.imin, other.imin),
            max(self.imax, other.imax),
            min(self.jmin, other.jmin),
            max(self.jmax, other.jmax),
        )
