"""The edge-flipping chain on two-colorings of a graph's vertices.

A coloring of n vertices is an int bitmask: bit i set means vertex i is
blue, clear means red.  One step picks an edge uniformly at random and
paints both endpoints blue with probability p, red otherwise.  Each step
consumes exactly one edge index and then one color coin from its stream,
in that order, so runs are reproducible draw for draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graphs import Graph


@dataclass(frozen=True)
class FlipParams:
    """Blue probability p; q = 1 - p is always derived, never stored."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not (0.0 <= p <= 1.0) or p != p:
            raise ValidationError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return 1.0 - self.p


def as_flip_params(params) -> FlipParams:
    if isinstance(params, FlipParams):
        return params
    return FlipParams(float(params))


class RngStream:
    """Counter-based random stream (Philox) with a fixed draw discipline.

    Identical seeds give identical sequences on every platform: integer
    draws use numpy's bounded-integer rejection over the raw bit stream
    and uniforms are 53-bit mantissas divided by 2**53.
    """

    def __init__(self, seed):
        self.seed = seed
        if isinstance(seed, np.random.SeedSequence):
            ss = seed
        else:
            ss = np.random.SeedSequence(seed)
        self._gen = np.random.Generator(np.random.Philox(ss))

    @classmethod
    def for_replica(cls, base_seed: int, replica_index: int) -> "RngStream":
        """Independent stream for one replica of a seeded experiment."""
        return cls((int(base_seed), int(replica_index)))

    def integer(self, bound: int) -> int:
        """Uniform draw from {0, ..., bound-1}."""
        return int(self._gen.integers(0, bound))

    def edge_index(self, m: int) -> int:
        return self.integer(m)

    def uniform(self) -> float:
        return float(self._gen.random())

    def coin(self, p: float) -> bool:
        return self.uniform() < p

    def __repr__(self):
        return f"RngStream(seed={self.seed!r})"


def all_blue(n: int) -> int:
    return (1 << n) - 1


def all_red(n: int) -> int:
    return 0


def blue_count(coloring: int) -> int:
    return coloring.bit_count()


def apply_face(coloring: int, edge: tuple[int, int], blue: bool) -> int:
    """Deterministic part of a step: repaint both endpoints of edge."""
    u, v = edge
    mask = (1 << u) | (1 << v)
    return coloring | mask if blue else coloring & ~mask


def step(g: Graph, params, coloring: int, rng: RngStream) -> int:
    params = as_flip_params(params)
    edge = g.edges[rng.edge_index(g.m)]
    return apply_face(coloring, edge, rng.coin(params.p))


def simulate(g: Graph, params, init: int, t: int, rng: RngStream) -> int:
    """Run t steps from the coloring init and return the final coloring."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    if not (0 <= init < (1 << g.n)):
        raise ValidationError(f"coloring {init} out of range for n={g.n}")
    c = init
    for _ in range(t):
        c = step(g, params, c, rng)
    return c


def phi_i(coloring: int, i: int, params) -> float:
    """Single-vertex observable: q on blue, -p on red.

    Its one-step conditional expectation shrinks by (m - deg(i)) / m, the
    share of edges missing vertex i.
    """
    params = as_flip_params(params)
    return params.q if (coloring >> i) & 1 else -params.p


def phi(coloring: int, params, n: int) -> float:
    """Sum of phi_i over all vertices; equals blue_count - p*n."""
    params = as_flip_params(params)
    return blue_count(coloring) - params.p * n
