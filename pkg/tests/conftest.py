import pytest

from flipmix.graphs import (
    Graph,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    path_graph,
)

# Fixed connected irregular graph on 7 vertices (degrees 2..3, m=9),
# standing in for "a random connected graph" while keeping runs
# reproducible.  Drawn once by hand; nothing downstream depends on how.
G7_EDGES = ((0, 1), (0, 4), (1, 2), (1, 5), (2, 3), (3, 4), (3, 6), (5, 6), (2, 6))


def make_suite():
    return [
        ("K_2", complete_graph(2)),
        ("K_3", complete_graph(3)),
        ("K_4", complete_graph(4)),
        ("C_5", cycle_graph(5)),
        ("path_4", path_graph(4)),
        ("K_23", complete_bipartite_graph(2, 3)),
        ("G7", Graph(7, G7_EDGES)),
    ]


@pytest.fixture(scope="session")
def suite():
    return make_suite()
