"""Finite simple connected graphs and the generators used by the CLI.

Vertices are 0..n-1.  Edges are stored canonically: each pair as
(min, max), the whole list sorted lexicographically, so two graphs with
the same edge set always compare equal.

Text format::

    n m
    u v        (m lines, one endpoint pair each, any order)

Generator specs (``generate``)::

    complete:n | cycle:n | path:n | bipartite:a,b | random_regular:n,k,seed
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(
        init=False, compare=False, repr=False
    )

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValidationError(f"need an integer n >= 2, got {self.n!r}")
        canon = []
        for e in self.edges:
            try:
                u, v = e
            except (TypeError, ValueError):
                raise ValidationError(f"edge {e!r} is not a pair") from None
            u, v = int(u), int(v)
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u},{v}) out of range for n={self.n}")
            canon.append((min(u, v), max(u, v)))
        canon.sort()
        if not canon:
            raise ValidationError("graph must have at least one edge")
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValidationError(f"duplicate edge {a}")
        object.__setattr__(self, "edges", tuple(canon))
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in nbrs))
        if not _connected(self.n, self.adjacency):
            raise ValidationError("graph is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)


def _connected(n, adjacency) -> bool:
    seen = bytearray(n)
    stack = [0]
    seen[0] = 1
    count = 1
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = 1
                count += 1
                stack.append(v)
    return count == n


def min_degree(g: Graph) -> int:
    return min(g.degrees)


def regular_degree(g: Graph) -> int | None:
    """The common degree if g is regular, else None."""
    degs = set(g.degrees)
    return degs.pop() if len(degs) == 1 else None


def parse_graph(text: str) -> Graph:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise ValidationError("empty graph text")
    head = lines[0].split()
    if len(head) != 2:
        raise ValidationError(f"header must be 'n m', got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ValidationError(f"header must be 'n m', got {lines[0]!r}") from None
    if len(lines) - 1 != m:
        raise ValidationError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ValidationError(f"line {i}: expected 'u v', got {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValidationError(f"line {i}: expected integers, got {ln!r}") from None
    return Graph(n, tuple(edges))


def render_graph(g: Graph) -> str:
    """Canonical text form; parse_graph(render_graph(g)) == g."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def complete_graph(n: int) -> Graph:
    if n < 2:
        raise ValidationError("complete graph needs n >= 2")
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValidationError("cycle needs n >= 3")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    if n < 2:
        raise ValidationError("path needs n >= 2")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_bipartite_graph(a: int, b: int) -> Graph:
    if a < 1 or b < 1:
        raise ValidationError("bipartite sides must be >= 1")
    return Graph(a + b, tuple((i, a + j) for i in range(a) for j in range(b)))


def random_regular_graph(n: int, k: int, seed: int) -> Graph:
    """k-regular simple connected graph via the pairing model.

    Stubs are paired by a seeded shuffle; any attempt producing a loop,
    a repeated edge, or a disconnected graph is thrown away whole and the
    pairing is redrawn, so the draw is uniform-ish over simple outcomes.
    Deterministic for a fixed (n, k, seed).
    """
    if not (1 <= k < n):
        raise ValidationError(f"need 1 <= k < n, got k={k}, n={n}")
    if (n * k) % 2:
        raise ValidationError(f"n*k must be even, got n={n}, k={k}")
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, n, k))))
    stubs = np.repeat(np.arange(n), k)
    for _ in range(10000):
        perm = gen.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        canon = {(min(u, v), max(u, v)) for u, v in pairs.tolist()}
        if len(canon) != len(pairs):
            continue
        try:
            return Graph(n, tuple(sorted(canon)))
        except ValidationError:
            continue  # disconnected draw
    raise ConsistencyError(f"pairing model failed to produce a graph for n={n}, k={k}")


def generate(spec: str) -> Graph:
    """Build a graph from a generator spec string like 'complete:4'."""
    name, _, arg = spec.partition(":")
    try:
        params = [int(x) for x in arg.split(",")] if arg else []
    except ValueError:
        raise ValidationError(f"bad generator parameters in {spec!r}") from None
    want = {"complete": 1, "cycle": 1, "path": 1, "bipartite": 2, "random_regular": 3}
    if name not in want:
        raise ValidationError(f"unknown generator {name!r}")
    if len(params) != want[name]:
        raise ValidationError(
            f"{name} takes {want[name]} parameter(s), got {len(params)}"
        )
    if name == "complete":
        return complete_graph(*params)
    if name == "cycle":
        return cycle_graph(*params)
    if name == "path":
        return path_graph(*params)
    if name == "bipartite":
        return complete_bipartite_graph(*params)
    return random_regular_graph(*params)
