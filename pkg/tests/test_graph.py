import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_graphs, complete, graphs, path, star
from forestdp.errors import GraphParseError, VertexRangeError
from forestdp.graph import (
    Graph,
    UnionFind,
    components_of_mask,
    connected_components,
    format_edge_list,
    gen_geometric,
    gen_gnp,
    geometric_from_points,
    induced_subgraph,
    node_distance_in_poset,
    parse_edge_list,
    spanning_forest_size,
)
from forestdp.combinatorics import largest_induced_star_exact
from forestdp.rng import make_stream, split


def test_parse_examples():
    g = parse_edge_list("3\n0 1\n")
    assert g.n == 3 and g.edges == ((0, 1),)
    one = parse_edge_list("1\n")
    assert one.n == 1 and one.m == 0
    assert parse_edge_list("3\n0 1\n1 0\n") == g
    assert parse_edge_list(b"# header\n\n3\n# c\n0 1\n") == g


@pytest.mark.parametrize(
    "text,line",
    [("3\n0 1 2\n", 2), ("3\n0 x\n", 2), ("3\n1 1\n", 2), ("a\n", 1), ("2 2\n", 1)],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(GraphParseError) as exc:
        parse_edge_list(text)
    assert exc.value.line == line


def test_parse_range_and_missing():
    with pytest.raises(VertexRangeError):
        parse_edge_list("3\n0 3\n")
    with pytest.raises(GraphParseError):
        parse_edge_list("# only a comment\n")


@given(graphs(max_n=10))
def test_edge_list_round_trip(g):
    assert parse_edge_list(format_edge_list(g)) == g


def test_components_examples():
    assert connected_components(Graph.empty(3)).count == 3
    assert connected_components(path(3)).count == 1
    k13_plus = Graph.from_edges(5, [(0, 1), (0, 2), (0, 3)])
    assert connected_components(k13_plus).count == 2


def test_spanning_forest_examples():
    assert spanning_forest_size(Graph.empty(4)) == 0
    assert spanning_forest_size(complete(3)) == 2
    assert spanning_forest_size(Graph.from_edges(4, [(0, 1), (2, 3)])) == 2


def _dfs_labels(g):
    labels = [-1] * g.n
    c = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        q = deque([s])
        labels[s] = c
        while q:
            u = q.popleft()
            for w in g.neighbors(u):
                if labels[w] < 0:
                    labels[w] = c
                    q.append(w)
        c += 1
    return labels, c


def test_components_match_naive_search():
    rng = make_stream(3)
    for _ in range(200):
        n = int(rng.integers(0, 65))
        g = gen_gnp(n, float(rng.uniform(0, 0.1)), rng)
        lab = connected_components(g)
        naive, count = _dfs_labels(g)
        assert lab.count == count
        assert list(lab.labels) == naive  # both number components by smallest member


@given(graphs(max_n=12))
def test_cc_plus_sf_is_n(g):
    assert connected_components(g).count + spanning_forest_size(g) == g.n
    full = (1 << g.n) - 1
    assert components_of_mask(g, full) == connected_components(g).count


def test_induced_subgraph_examples():
    tri = complete(3)
    sub, mapping = induced_subgraph(tri, {0, 1})
    assert sub.edges == ((0, 1),) and mapping == (0, 1)
    g = Graph.from_edges(5, [(0, 1), (1, 4), (2, 3)])
    same, mapping = induced_subgraph(g, range(5))
    assert same == g and mapping == tuple(range(5))
    leaves, _ = induced_subgraph(star(3), [1, 2, 3])
    assert leaves.m == 0 and leaves.n == 3
    with pytest.raises(VertexRangeError):
        induced_subgraph(g, [7])


def test_node_distance_examples():
    assert node_distance_in_poset({0, 1}, {0, 1}) == 0
    assert node_distance_in_poset({0, 1, 2}, {0, 1}) == 1
    assert node_distance_in_poset({0, 1}, {1, 2}) == 2


def test_node_distance_is_shortest_path_in_poset():
    # the poset graph links vertex sets differing in one element
    for n in range(6):
        size = 1 << n
        for src in range(size):
            dist = {src: 0}
            q = deque([src])
            while q:
                a = q.popleft()
                for v in range(n):
                    b = a ^ (1 << v)
                    if b not in dist:
                        dist[b] = dist[a] + 1
                        q.append(b)
            A = {v for v in range(n) if src >> v & 1}
            for b, d in dist.items():
                assert node_distance_in_poset(A, {v for v in range(n) if b >> v & 1}) == d


def test_gnp_extremes_and_mean_degree():
    rng = make_stream(0)
    assert gen_gnp(20, 0.0, rng).m == 0
    assert gen_gnp(20, 1.0, rng).m == 190
    n, p = 1000, 2 / 1000
    means = [2 * gen_gnp(n, p, r).m / n for r in split(rng, 20)]
    # each mean degree has variance about 2 p (1 - p) (n - 1) / n; pool the 20 seeds
    sigma = np.sqrt(2 * p * (1 - p) * (n - 1) / n / 20)
    assert abs(np.mean(means) - p * (n - 1)) < 3 * sigma
    with pytest.raises(ValueError):
        gen_gnp(5, 1.5, rng)


def test_gnp_reproducible():
    a = gen_gnp(50, 0.1, make_stream(9))
    b = gen_gnp(50, 0.1, make_stream(9))
    assert a == b


def test_geometric_examples():
    rng = make_stream(1)
    assert gen_geometric(200, 1e-9, rng).m == 0
    assert geometric_from_points([(0, 0), (0, 1)], 0.5).m == 0
    assert geometric_from_points([(0, 0), (0, 0.4)], 0.5).m == 1
    for n, r in ((150, 0.05), (150, 0.1), (100, 0.2), (40, 0.4)):
        g = gen_geometric(n, r, rng)
        assert largest_induced_star_exact(g)[0] <= 5


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4) and not uf.union(1, 0)
    assert uf.count == 3 and uf.find(0) == uf.find(1)


def test_all_graphs_counts():
    assert [sum(1 for _ in all_graphs(n)) for n in range(5)] == [1, 1, 2, 8, 64]
