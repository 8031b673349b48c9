import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forestdp.maxflow import FlowNetwork


@st.composite
def networks(draw):
    n = draw(st.integers(2, 9))
    arcs = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.floats(0, 5, allow_nan=False)),
            max_size=30,
        )
    )
    return n, [(u, v, c) for u, v, c in arcs if u != v]


@given(networks())
def test_dinic_matches_networkx(net):
    n, arcs = net
    fn = FlowNetwork(n)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for u, v, c in arcs:
        fn.add_edge(u, v, c)
        cap = g[u][v]["capacity"] + c if g.has_edge(u, v) else c
        g.add_edge(u, v, capacity=cap)
    ours = fn.max_flow(0, n - 1)
    ref = nx.maximum_flow_value(g, 0, n - 1)
    assert ours == pytest.approx(ref, abs=1e-9)
    # the residual source side is a minimum cut
    side = fn.source_side(0)
    cut = sum(c for u, v, c in arcs if side[u] and not side[v])
    assert not side[n - 1] and cut == pytest.approx(ref, abs=1e-9)


def test_infinite_capacity_arc():
    fn = FlowNetwork(3)
    fn.add_edge(0, 1, float("inf"))
    fn.add_edge(1, 2, 2.5)
    assert fn.max_flow(0, 2) == 2.5
