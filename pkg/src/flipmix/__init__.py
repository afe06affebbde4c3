"""Edge-flipping Markov chains on graphs: exact spectra, total-variation
bounds, cutoff diagnostics, and coupling experiments."""

__version__ = "0.1.0"

from .chain import FlipParams, RngStream, blue_count, simulate, step
from .errors import ConsistencyError, FlipmixError, ValidationError
from .graphs import (
    Graph,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    generate,
    parse_graph,
    path_graph,
    random_regular_graph,
)

__all__ = [
    "__version__",
    "ConsistencyError",
    "FlipmixError",
    "FlipParams",
    "Graph",
    "RngStream",
    "ValidationError",
    "blue_count",
    "complete_bipartite_graph",
    "complete_graph",
    "cycle_graph",
    "generate",
    "parse_graph",
    "path_graph",
    "random_regular_graph",
    "simulate",
    "step",
]
