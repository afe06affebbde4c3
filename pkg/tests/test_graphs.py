import pytest

from flipmix.errors import ValidationError
from flipmix.graphs import (
    Graph,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    generate,
    min_degree,
    parse_graph,
    path_graph,
    random_regular_graph,
    render_graph,
    regular_degree,
)


def test_parse_smallest_graphs():
    assert parse_graph("2 1\n0 1") == complete_graph(2)
    assert parse_graph("3 3\n0 1\n1 2\n0 2") == complete_graph(3)
    assert parse_graph("4 3\n0 1\n2 3\n1 2") == path_graph(4)


def test_parse_rejects_bad_input():
    with pytest.raises(ValidationError):
        parse_graph("")
    with pytest.raises(ValidationError):
        parse_graph("2 1\n0 0")  # self-loop
    with pytest.raises(ValidationError):
        parse_graph("2 2\n0 1\n1 0")  # duplicate edge
    with pytest.raises(ValidationError):
        parse_graph("2 1\n0 5")  # vertex out of range
    with pytest.raises(ValidationError):
        parse_graph("4 2\n0 1\n2 3")  # disconnected
    with pytest.raises(ValidationError):
        parse_graph("2 1\n0 1\n0 1")  # edge count mismatch


def test_roundtrip(suite):
    for _, g in suite:
        assert parse_graph(render_graph(g)) == g


def test_generate_families():
    assert generate("complete:4").m == 6
    k23 = generate("bipartite:2,3")
    assert k23 == complete_bipartite_graph(2, 3)
    assert k23.m == 6 and min_degree(k23) == 2
    c5 = generate("cycle:5")
    assert c5.m == 5 and regular_degree(c5) == 2


def test_generate_rejects_bad_specs():
    for bad in ("cycle:2", "complete:1", "triangle:3", "complete:x",
                "bipartite:2", "random_regular:5,3,1"):  # odd n*k
        with pytest.raises(ValidationError):
            generate(bad)


def test_degree_queries():
    assert min_degree(complete_graph(4)) == 3
    assert regular_degree(complete_graph(4)) == 3
    assert min_degree(path_graph(4)) == 1
    assert regular_degree(path_graph(4)) is None
    assert min_degree(complete_bipartite_graph(2, 3)) == 2
    assert regular_degree(complete_bipartite_graph(2, 3)) is None


def test_handshake_identity(suite):
    for _, g in suite:
        assert sum(g.degrees) == 2 * g.m


def test_edges_are_canonical(suite):
    for _, g in suite:
        assert list(g.edges) == sorted((min(u, v), max(u, v)) for u, v in g.edges)


def test_random_regular_deterministic_and_regular():
    a = random_regular_graph(8, 3, seed=7)
    b = random_regular_graph(8, 3, seed=7)
    assert a == b
    assert regular_degree(a) == 3
    assert a != random_regular_graph(8, 3, seed=8)
    big = generate("random_regular:12,4,3")
    assert regular_degree(big) == 4
