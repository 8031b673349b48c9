import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_graphs, complete, cycle, graphs, path, star
from forestdp.combinatorics import down_sensitivity_sf
from forestdp.errors import CapacityError, ConvergenceError, ParameterError
from forestdp.graph import Graph, gen_geometric, gen_gnp, induced_subgraph, spanning_forest_size
from forestdp.polytope import (
    ConstraintRow,
    LpCertificate,
    _initial_rows,
    check_certificate,
    eval_extension_bruteforce,
    eval_lipschitz_extension,
    lp_maximize,
    separate_forest_bruteforce,
    separate_forest_maxflow,
)
from forestdp.rng import make_stream


def _violation(g, x, s):
    inside = sum(x[i] for i, (u, v) in enumerate(g.edges) if u in s and v in s)
    return inside - len(s) + 1


def test_lp_maximize_examples():
    edge = Graph.from_edges(2, [(0, 1)])
    assert lp_maximize(_initial_rows(edge, 1), 1).sum() == pytest.approx(1.0)
    tri = complete(3)
    rows = _initial_rows(tri, 1)
    assert {r.kind for r in rows} == {"nonneg", "degree", "forest"}
    assert lp_maximize(rows, 3).sum() == pytest.approx(1.5)
    assert lp_maximize([], 0).sum() == 0.0


def test_constraint_row_validation():
    with pytest.raises(ValueError):
        ConstraintRow("forest", (0,), 1.0, frozenset({0}))
    with pytest.raises(ValueError):
        ConstraintRow("forest", (0,), 2.0, frozenset({0, 1}))


def test_separation_examples():
    tri = complete(3)
    assert separate_forest_bruteforce(tri, np.zeros(3)) is None
    assert separate_forest_bruteforce(tri, np.ones(3)) == frozenset({0, 1, 2})
    tree = path(6)
    assert separate_forest_bruteforce(tree, np.ones(tree.m)) is None
    assert separate_forest_maxflow(tree, np.ones(tree.m)) is None
    assert separate_forest_maxflow(tri, np.zeros(3)) is None
    k4 = complete(4)
    s = separate_forest_maxflow(k4, np.full(6, 2 / 3))
    assert s is not None and _violation(k4, np.full(6, 2 / 3), s) > 1e-7
    with pytest.raises(CapacityError):
        separate_forest_bruteforce(Graph.empty(17), np.zeros(0))


def test_maxflow_separation_agrees_with_bruteforce():
    rng = make_stream(21)
    for _ in range(500):
        n = int(rng.integers(2, 11))
        g = gen_gnp(n, float(rng.uniform(0.2, 0.9)), rng)
        x = rng.uniform(0, 1.2, g.m)
        brute = separate_forest_bruteforce(g, x)
        flow = separate_forest_maxflow(g, x)
        assert (brute is None) == (flow is None)
        if brute is not None:
            # brute force returns a most-violated set
            assert _violation(g, x, brute) >= _violation(g, x, flow) - 1e-9
            assert _violation(g, x, flow) > 1e-7


def test_extension_examples():
    tri = complete(3)
    assert eval_lipschitz_extension(tri, 1).value == pytest.approx(1.5)
    assert eval_extension_bruteforce(tri, 1) == pytest.approx(1.5)
    assert eval_lipschitz_extension(tri, 2).value == pytest.approx(2.0)
    assert eval_extension_bruteforce(Graph.empty(5), 1) == 0.0
    assert eval_lipschitz_extension(Graph.empty(5), 1).value == 0.0
    for d in range(1, 6):
        isolated = Graph.empty(d)
        universal = isolated.add_vertex(range(d))
        assert eval_lipschitz_extension(isolated, d).value == 0.0
        assert eval_lipschitz_extension(universal, d, shortcuts=False).value == pytest.approx(d)
        assert eval_lipschitz_extension(star(d + 1), d, shortcuts=False).value == pytest.approx(d)
    assert eval_lipschitz_extension(star(5), 4).value == pytest.approx(4)


def test_extension_parameter_errors():
    with pytest.raises(ParameterError):
        eval_lipschitz_extension(path(3), 0.5)
    with pytest.raises(CapacityError):
        eval_extension_bruteforce(Graph.empty(15), 1)


def test_iteration_cap_raises_with_certificate():
    g = gen_gnp(10, 0.5, make_stream(0))
    assert eval_lipschitz_extension(g, 3, shortcuts=False).iterations > 1
    with pytest.raises(ConvergenceError) as exc:
        eval_lipschitz_extension(g, 3, shortcuts=False, max_iter=1, cuts_per_round=1)
    assert isinstance(exc.value.certificate, LpCertificate)


@given(graphs(max_n=9), st.sampled_from([1, 1.5, 2, 3, 4]))
def test_cutting_plane_matches_bruteforce(g, delta):
    a = eval_lipschitz_extension(g, delta, shortcuts=False)
    b = eval_lipschitz_extension(g, delta)
    ref = eval_extension_bruteforce(g, delta)
    assert a.value == pytest.approx(ref, abs=1e-6)
    assert b.value == pytest.approx(ref, abs=1e-6)
    assert check_certificate(g, delta, a) and check_certificate(g, delta, b)


@given(graphs(max_n=9))
def test_underestimate_monotone_saturated(g):
    sf = spanning_forest_size(g)
    vals = [eval_lipschitz_extension(g, d).value for d in (1, 1.5, 2, 3, max(g.n - 1, 1))]
    assert all(a <= b + 1e-6 for a, b in zip(vals, vals[1:]))
    assert vals[-1] <= sf + 1e-6
    if g.n >= 2:
        assert eval_lipschitz_extension(g, g.n - 1, shortcuts=False).value == pytest.approx(sf, abs=1e-7)


@given(graphs(min_n=1, max_n=9), st.data())
def test_lipschitz_under_vertex_removal(g, data):
    v = data.draw(st.integers(0, g.n - 1))
    h = induced_subgraph(g, [u for u in range(g.n) if u != v])[0]
    for d in (1, 2, 3):
        gap = abs(eval_lipschitz_extension(g, d).value - eval_lipschitz_extension(h, d).value)
        assert gap <= d + 1e-6


@given(graphs(max_n=8))
def test_anchor_containment(g):
    delta = down_sensitivity_sf(g) + 1
    assert eval_lipschitz_extension(g, delta, shortcuts=False).value == pytest.approx(
        spanning_forest_size(g), abs=1e-7
    )


def test_certificate_json_dump():
    cert = eval_lipschitz_extension(complete(4), 1, shortcuts=False)
    data = json.loads(cert.to_json())
    assert data["value"] == pytest.approx(cert.value)
    assert {r["kind"] for r in data["rows"]} <= {"nonneg", "degree", "forest"}
    assert len(data["weights"]) == 6


def test_medium_graphs_certified():
    rng = make_stream(31)
    for _ in range(4):
        g = gen_gnp(60, 3 / 60, rng)
        for d in (1, 2):
            cert = eval_lipschitz_extension(g, d)
            assert check_certificate(g, d, cert)
            assert cert.value <= spanning_forest_size(g) + 1e-7
    g = gen_geometric(80, 0.15, rng)
    cert = eval_lipschitz_extension(g, 2)
    assert check_certificate(g, 2, cert)
