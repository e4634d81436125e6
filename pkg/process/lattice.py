"""Particle configurations on the line Z and the grid Z^2.

A configuration is a sparse map from occupied site to particle count. Empty
sites are never stored. The set of sites holding two or more particles (the
only ones that move) is kept alongside the map so a step costs O(active
sites) rather than O(occupied sites).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .errors import InvalidArgumentError

Site = Union[int, tuple[int, int]]


class Topology(str, Enum):
    """Underlying graph of the process."""
    LINE = "line"
    GRID2D = "grid2"


ORIGIN: dict[Topology, Site] = {
    Topology.LINE: 0,
    Topology.GRID2D: (0, 0),
}


# =============================================================================
# Configuration
# =============================================================================

@dataclass
class Configuration:
    """Occupancy of the lattice at one time step.

    Invariants: counts sum to ``n``; no stored count is zero.
    """
    occupancy: dict[Site, int]
    n: int
    topology: Topology = Topology.LINE
    _active: set = field(default_factory=set, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.topology = Topology(self.topology)
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if any(count <= 0 for count in self.occupancy.values()):
            raise InvalidArgumentError("stored counts must be positive")
        total = sum(self.occupancy.values())
        if total != self.n:
            raise InvalidArgumentError(f"counts sum to {total}, expected n={self.n}")
        self._active = {site for site, count in self.occupancy.items() if count >= 2}

    @classmethod
    def from_sites(cls, occupancy: dict[Site, int], topology: Topology = Topology.LINE) -> "Configuration":
        """Build a configuration, inferring n from the counts."""
        return cls(dict(occupancy), sum(occupancy.values()), topology)

    def copy(self) -> "Configuration":
        clone = Configuration.__new__(Configuration)
        clone.occupancy = dict(self.occupancy)
        clone.n = self.n
        clone.topology = self.topology
        clone._active = set(self._active)
        return clone

    def sites(self) -> list[Site]:
        """Occupied sites in ascending (lexicographic on the grid) order."""
        return sorted(self.occupancy)

    def active_sites(self) -> list[Site]:
        """Sites holding at least two particles, ascending."""
        return sorted(self._active)

    def total(self) -> int:
        return sum(self.occupancy.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.n == other.n
            and self.topology == other.topology
            and self.occupancy == other.occupancy
        )


# =============================================================================
# Operations
# =============================================================================

def init_point_mass(n: int, topology: Topology = Topology.LINE) -> Configuration:
    """All n particles on the origin."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    topology = Topology(topology)
    return Configuration({ORIGIN[topology]: n}, n, topology)


def is_settled(config: Configuration) -> bool:
    """True iff every site holds at most one particle."""
    return not config._active


def span(config: Configuration) -> int:
    """Max minus min occupied coordinate on the line."""
    if config.topology is not Topology.LINE:
        raise InvalidArgumentError("span is defined on the line; use shape2d metrics for the grid")
    return max(config.occupancy) - min(config.occupancy)


def closest_stack(config: Configuration) -> tuple[int, int]:
    """Distance d_t of the closest particle to the origin, and the size of
    the largest stack at that distance.

    Scans outwards from the origin, so it costs O(d_t).
    """
    if config.topology is not Topology.LINE:
        raise InvalidArgumentError("closest_stack is defined on the line")
    occupancy = config.occupancy
    if 0 in occupancy:
        return 0, occupancy[0]
    radius = 1
    while True:
        left = occupancy.get(-radius, 0)
        right = occupancy.get(radius, 0)
        if left or right:
            return radius, max(left, right)
        radius += 1


def closest_distance(config: Configuration) -> int:
    """d_t: min over occupied sites of |coordinate|."""
    return closest_stack(config)[0]


def chebyshev_radius(site: tuple[int, int]) -> int:
    return max(abs(site[0]), abs(site[1]))


__all__ = [
    "Site",
    "Topology",
    "ORIGIN",
    "Configuration",
    "init_point_mass",
    "is_settled",
    "span",
    "closest_stack",
    "closest_distance",
    "chebyshev_radius",
]
