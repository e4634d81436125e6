"""One synchronous dispersion step: sample the moves, then apply them.

Departures are computed from the counts at time t only; arrivals are summed
afterwards. Every particle on a site with at least two particles moves to a
uniformly random neighbour, singletons stay put.

Line draws store b = number of particles moving right (i -> i+1).
Grid draws store (+x, -x, +y, -y) counts.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConsistencyError
from .lattice import Configuration, Site, Topology
from .rng import StepStream, binomial_half

GridMove = tuple[int, int, int, int]
Draw = Union[int, GridMove]

GRID_OFFSETS: tuple[tuple[int, int], ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class MoveDraw:
    """Per-site randomness of one step, in ascending site order."""
    t: int
    stream_id: str
    topology: Topology
    counts: dict[Site, int] = field(default_factory=dict)
    draws: dict[Site, Draw] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.draws)

    def right(self, site: Site) -> int:
        """b at a line site; KeyError when the site has no draw."""
        return self.draws[site]


# =============================================================================
# Sampling
# =============================================================================

def sample_moves(config: Configuration, stream: StepStream) -> MoveDraw:
    """Draw the moves of every site with count >= 2.

    Line: b ~ Binomial(k, 1/2). Grid: Multinomial(k; 1/4 x 4) built from
    exact halvings: k splits into x-axis vs y-axis, then each axis splits
    into its two directions.
    """
    sites = config.active_sites()
    counts = {site: config.occupancy[site] for site in sites}
    if not sites:
        return MoveDraw(stream.t, stream.stream_id, config.topology, counts, {})

    ks = np.fromiter(counts.values(), dtype=np.int64, count=len(sites))
    rng = stream.generator

    if config.topology is Topology.LINE:
        rights = binomial_half(rng, ks)
        draws = {site: int(b) for site, b in zip(sites, rights)}
    else:
        on_x = binomial_half(rng, ks)
        halves = binomial_half(rng, np.concatenate([on_x, ks - on_x]))
        plus_x, plus_y = halves[: len(sites)], halves[len(sites):]
        draws = {
            site: (int(px), int(x - px), int(py), int(k - x - py))
            for site, k, x, px, py in zip(sites, ks, on_x, plus_x, plus_y)
        }

    return MoveDraw(stream.t, stream.stream_id, config.topology, counts, draws)


# =============================================================================
# Application
# =============================================================================

def _check_draw(config: Configuration, draw: MoveDraw):
    if draw.topology is not config.topology:
        raise ConsistencyError("draw and configuration have different topologies")
    if len(draw.draws) != len(config._active):
        raise ConsistencyError(
            f"draw covers {len(draw.draws)} sites but configuration has {len(config._active)} active sites"
        )
    for site, count in draw.counts.items():
        if config.occupancy.get(site) != count:
            raise ConsistencyError(f"site {site} holds {config.occupancy.get(site)}, draw expected {count}")


def _arrivals(site: Site, count: int, move: Draw, topology: Topology) -> list[tuple[Site, int]]:
    if topology is Topology.LINE:
        return [(site + 1, move), (site - 1, count - move)]
    x, y = site
    return [((x + dx, y + dy), k) for (dx, dy), k in zip(GRID_OFFSETS, move)]


def apply_in_place(config: Configuration, draw: MoveDraw) -> Configuration:
    """Apply ``draw`` to ``config``, mutating it. Returns ``config``."""
    _check_draw(config, draw)
    occupancy = config.occupancy
    active = config._active

    for site in draw.draws:
        del occupancy[site]
        active.discard(site)

    moved_in = 0
    for site, move in draw.draws.items():
        count = draw.counts[site]
        for target, k in _arrivals(site, count, move, config.topology):
            if k < 0:
                raise ConsistencyError(f"negative move count at {site}: {move}")
            if k == 0:
                continue
            moved_in += k
            updated = occupancy.get(target, 0) + k
            occupancy[target] = updated
            if updated >= 2:
                active.add(target)

    if moved_in != sum(draw.counts.values()):
        raise ConsistencyError("draw does not conserve the particles it moves")
    return config


def apply_moves(config: Configuration, draw: MoveDraw) -> Configuration:
    """Return the configuration after applying ``draw``; ``config`` is untouched."""
    return apply_in_place(config.copy(), draw)


def step(config: Configuration, stream: StepStream) -> tuple[Configuration, MoveDraw]:
    """One synchronous step. The draw is returned so instrumentation can
    reuse the realized binomials."""
    draw = sample_moves(config, stream)
    return apply_moves(config, draw), draw


__all__ = [
    "MoveDraw",
    "Draw",
    "GridMove",
    "GRID_OFFSETS",
    "sample_moves",
    "apply_moves",
    "apply_in_place",
    "step",
]
