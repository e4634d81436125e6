"""Ordered view of a line configuration.

Particles are relabelled left to right after every step, so particle j
always sits at the j-th order statistic X_j of the position multiset. All
arrays are 0-based: ``X[j]`` is particle j+1, ``g[j] = X[j+1] - X[j]`` is the
gap to its right neighbour, ``P[j]`` the rank of its stack.
"""

from dataclasses import dataclass

import numpy as np

from process.errors import InvalidArgumentError
from process.lattice import Configuration, Topology

# j is in I_t when its gap is at least this wide
ACTIVE_GAP = 2


@dataclass(frozen=True)
class OrderedView:
    """Sorted positions, gaps and stacks of a line configuration."""
    X: np.ndarray
    g: np.ndarray
    s: np.ndarray
    P: np.ndarray
    m: int
    I: np.ndarray
    J: np.ndarray
    stack_sites: np.ndarray
    stack_counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.X.size)

    @property
    def max_gap(self) -> int:
        return int(self.g.max()) if self.g.size else 0

    def stack_index(self, sites) -> np.ndarray:
        """Stack rank of each given occupied site."""
        return np.searchsorted(self.stack_sites, np.asarray(sites, dtype=np.int64))


def ordered_view(config: Configuration) -> OrderedView:
    """Unfold a line configuration into the ordered particle view."""
    if config.topology is not Topology.LINE:
        raise InvalidArgumentError("the ordered view is defined on the line")

    stack_sites = np.array(config.sites(), dtype=np.int64)
    stack_counts = np.array([config.occupancy[site] for site in stack_sites.tolist()], dtype=np.int64)
    m = int(stack_sites.size)

    X = np.repeat(stack_sites, stack_counts)
    g = np.diff(X)
    s = np.repeat(stack_counts, stack_counts)
    P = np.repeat(np.arange(m, dtype=np.int64), stack_counts)

    return OrderedView(
        X=X,
        g=g,
        s=s,
        P=P,
        m=m,
        I=np.flatnonzero(g >= ACTIVE_GAP),
        J=np.flatnonzero(s == 1),
        stack_sites=stack_sites,
        stack_counts=stack_counts,
    )


__all__ = ["OrderedView", "ordered_view", "ACTIVE_GAP"]
