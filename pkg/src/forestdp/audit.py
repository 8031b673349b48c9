"""Randomized invariant suites behind ``forestdp audit``.

Each suite draws its own graphs from a child stream and returns a
:class:`SuiteResult`; a suite fails on the first counterexample it records.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .combinatorics import (
    ForestEdgeSet,
    build_bounded_spanning_forest,
    check_repair_trace,
    delta_star_exact,
    down_sensitivity_bruteforce,
    down_sensitivity_sf,
    has_bounded_spanning_forest_exact,
    is_spanning_forest,
    leaf_elimination_order,
    repair_spanning_forest,
)
from .graph import Graph, UnionFind, gen_gnp, induced_subgraph, spanning_forest_size
from .oracles import CanonicalEvaluator, audit_optimality, audit_remove_set
from .polytope import eval_extension_bruteforce, eval_lipschitz_extension
from .rng import make_stream

TOL = 1e-6
OPTIMALITY_MAX_N = 6


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        if len(self.failures) < 5:
            self.failures.append(msg)
        else:
            self.failures[-1] = "... more failures"


def cutting_plane_value(g: Graph, delta: float) -> float:
    """``f_Delta`` from the LP loop with every combinatorial shortcut disabled."""
    return eval_lipschitz_extension(g, delta, shortcuts=False).value


def faulty_value(g: Graph, delta: float) -> float:
    """Self-test fault: the degree rows are built with ``Delta + 1`` instead of ``Delta``."""
    return eval_lipschitz_extension(g, delta + 1, shortcuts=False).value


def random_graph(rng: np.random.Generator, max_n: int, min_n: int = 0) -> Graph:
    n = int(rng.integers(min_n, max_n + 1))
    p = float(rng.choice(np.arange(1, 10) / 10))
    return gen_gnp(n, p, rng)


def _edges_text(g: Graph) -> str:
    return f"n={g.n} edges={list(g.edges)}"


def suite_cross_oracle(rng, max_n: int, trials: int, value: Callable = cutting_plane_value) -> SuiteResult:
    res = SuiteResult("cross_oracle")
    for _ in range(trials):
        g = random_graph(rng, max_n)
        for delta in sorted({1, 2, 3, max(g.n, 1)}):
            a, b = value(g, delta), eval_extension_bruteforce(g, delta)
            res.checks += 1
            if abs(a - b) > TOL:
                res.fail(f"Delta={delta} cutting-plane {a} vs brute force {b}: {_edges_text(g)}")
    return res


def suite_lipschitz(rng, max_n: int, trials: int, value: Callable = cutting_plane_value) -> SuiteResult:
    """Node-neighbour pairs ``(G, G - v)`` differ by at most Delta."""
    res = SuiteResult("lipschitz")
    for _ in range(trials):
        g = random_graph(rng, max_n, min_n=1)
        v = int(rng.integers(g.n))
        h = induced_subgraph(g, [u for u in range(g.n) if u != v])[0]
        for delta in (1, 2, 3):
            a, b = value(g, delta), value(h, delta)
            res.checks += 1
            if abs(a - b) > delta + TOL:
                res.fail(f"Delta={delta} |{a} - {b}| > Delta removing {v}: {_edges_text(g)}")
    return res


def suite_monotonicity(rng, max_n: int, trials: int, value: Callable = cutting_plane_value) -> SuiteResult:
    """``f_1 <= f_2 <= ... <= f_n <= f_sf``."""
    res = SuiteResult("monotonicity")
    for _ in range(trials):
        g = random_graph(rng, max_n)
        vals = [value(g, d) for d in range(1, max(g.n, 1) + 1)]
        sf = spanning_forest_size(g)
        res.checks += 1
        if any(a > b + TOL for a, b in zip(vals, vals[1:])) or vals[-1] > sf + TOL:
            res.fail(f"values {vals} not monotone below f_sf={sf}: {_edges_text(g)}")
    return res


def random_repair_instance(g: Graph, rng: np.random.Generator):
    """A forest ``F0`` in which the new vertex ``v0`` hangs off a saturated neighbour.

    ``v0`` is the first vertex of the leaf-elimination order (a non-cut
    vertex). ``G - v0`` gets a random forest with degrees at most ``s(G) + 1``
    (or the builder's forest when that does not span), and ``v0`` is attached
    to the neighbour of largest forest degree. Returns None for graphs without
    a usable ``v0``.
    """
    if g.m == 0:
        return None
    delta = down_sensitivity_sf(g) + 1
    v0 = leaf_elimination_order(g)[0]
    if g.degree(v0) == 0:
        return None
    sub, mapping = induced_subgraph(g, [v for v in range(g.n) if v != v0])
    uf = UnionFind(sub.n)
    deg = [0] * sub.n
    edges = []
    for i in rng.permutation(sub.m):
        a, b = sub.edges[i]
        if deg[a] < delta and deg[b] < delta and uf.union(a, b):
            deg[a] += 1
            deg[b] += 1
            edges.append((a, b))
    if not is_spanning_forest(sub, edges):
        edges = build_bounded_spanning_forest(sub, delta).edges
    forest = ForestEdgeSet(g.n, [(mapping[a], mapping[b]) for a, b in edges])
    v1 = max(g.adjacency[v0], key=lambda w: (forest.degree(w), -w))
    forest.add(v0, v1)
    return delta, v0, forest


def suite_repair_trace(rng, max_n: int, trials: int) -> SuiteResult:
    res = SuiteResult("repair_trace")
    for _ in range(trials):
        g = random_graph(rng, max_n, min_n=2)
        inst = random_repair_instance(g, rng)
        if inst is None:
            continue
        delta, v0, f0 = inst
        out, trace = repair_spanning_forest(g, delta, v0, f0)
        res.checks += 1
        problems = check_repair_trace(g, delta, trace)
        if out.max_degree() > delta or not is_spanning_forest(g, out.edges):
            problems.append("final forest is not a spanning Delta-forest")
        if problems:
            res.fail(f"{problems}: {_edges_text(g)}")
    return res


def suite_down_sensitivity(rng, max_n: int, trials: int) -> SuiteResult:
    """Brute-force ``DS(f_sf)`` equals the largest induced star; ``Delta* <= s + 1``."""
    res = SuiteResult("down_sensitivity")
    for _ in range(trials):
        g = random_graph(rng, min(max_n, 9))
        s = down_sensitivity_sf(g)
        ds = down_sensitivity_bruteforce(spanning_forest_size, g)
        res.checks += 1
        if ds != s:
            res.fail(f"DS={ds} but s(G)={s}: {_edges_text(g)}")
        if delta_star_exact(g) > s + 1:
            res.fail(f"Delta* > s(G)+1: {_edges_text(g)}")
    return res


def suite_anchor_set(rng, max_n: int, trials: int, value: Callable = cutting_plane_value) -> SuiteResult:
    """``DS(G) <= Delta - 1`` implies ``f_Delta(G) = f_sf(G)``."""
    res = SuiteResult("anchor_set")
    for _ in range(trials):
        g = random_graph(rng, max_n)
        delta = down_sensitivity_sf(g) + 1
        val, sf = value(g, delta), spanning_forest_size(g)
        res.checks += 1
        if abs(val - sf) > TOL:
            res.fail(f"f_{delta}={val} but f_sf={sf}: {_edges_text(g)}")
    return res


def suite_optimality(rng, max_n: int, trials: int, value: Callable | None = None) -> SuiteResult:
    res = SuiteResult("optimality")
    ev = CanonicalEvaluator(value or eval_extension_bruteforce)
    for _ in range(trials):
        g = random_graph(rng, min(max_n, OPTIMALITY_MAX_N))
        for delta in (1, 2, 3):
            v = audit_optimality(g, delta, ev)
            res.checks += 1
            if not v.passed:
                res.fail(v.to_json())
            if g.m and not has_bounded_spanning_forest_exact(g, delta):
                w = audit_remove_set(g, delta, ev)
                res.checks += 1
                if not w.passed:
                    res.fail(w.to_json())
    return res


SUITES = {
    "cross_oracle": suite_cross_oracle,
    "lipschitz": suite_lipschitz,
    "monotonicity": suite_monotonicity,
    "repair_trace": suite_repair_trace,
    "down_sensitivity": suite_down_sensitivity,
    "anchor_set": suite_anchor_set,
    "optimality": suite_optimality,
}
LP_SUITES = {"cross_oracle", "lipschitz", "monotonicity", "anchor_set", "optimality"}


def run_audit(max_n: int, trials: int, seed: int, inject_fault: bool = False) -> list[SuiteResult]:
    streams = make_stream(seed).spawn(len(SUITES))
    out = []
    for (name, suite), rng in zip(SUITES.items(), streams):
        start = time.perf_counter()
        if inject_fault and name in LP_SUITES:
            res = suite(rng, max_n, trials, faulty_value)
        else:
            res = suite(rng, max_n, trials)
        res.seconds = round(time.perf_counter() - start, 3)
        out.append(res)
    return out


def summary(results: list[SuiteResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "suites": [dict(asdict(r), passed=r.passed) for r in results],
    }
