"""The Lipschitz extension ``f_Delta(G) = max { x(E) : x in P_Delta(G) }``.

``P_Delta(G)`` is the degree-bounded forest polytope::

    x(e)       >= 0          for every edge e
    x(E[S])    <= |S| - 1    for every vertex set S with |S| >= 2
    x(delta(v)) <= Delta     for every vertex v

The exponential family of subset rows is handled by cutting planes with a
min-cut separation oracle. :func:`eval_extension_bruteforce` materializes every
subset row and is the reference the cutting-plane evaluator is checked against.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import highspy
import numpy as np

from .combinatorics import ForestEdgeSet, bounded_forest_heuristic, try_bounded_spanning_forest
from .errors import CapacityError, ConvergenceError, LpError, ParameterError
from .graph import Graph, connected_components, induced_subgraph
from .maxflow import FlowNetwork

DEFAULT_TOL = 1e-7
BRUTE_SEPARATION_MAX_N = 16
BRUTE_EXTENSION_MAX_N = 14

_HIGHS_OPTIONS = {
    "output_flag": False,
    "solver": "simplex",
    "simplex_strategy": 1,  # dual simplex: warm restarts after adding cuts
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
    "random_seed": 0,
    "threads": 1,
}


@dataclass(frozen=True)
class ConstraintRow:
    """One inequality ``sum_{e in support} x_e <= bound`` (or ``x_e >= 0`` for nonneg)."""

    kind: str  # "nonneg" | "degree" | "forest"
    support: tuple[int, ...]
    bound: float
    witness: frozenset[int] | None = None

    def __post_init__(self):
        if self.kind == "forest":
            if self.witness is None or len(self.witness) < 2:
                raise ValueError("forest rows need a witness set of size >= 2")
            if self.bound != len(self.witness) - 1:
                raise ValueError("forest row bound must be |S| - 1")


@dataclass
class LpCertificate:
    value: float
    point: np.ndarray
    iterations: int
    rows_added: int
    rows: list[ConstraintRow] = field(default_factory=list, repr=False)
    edges: tuple[tuple[int, int], ...] = field(default=(), repr=False)

    def to_json(self) -> str:
        """Final row set and LP point, for debugging."""
        rows = [
            {
                "kind": r.kind,
                "support": [list(self.edges[i]) for i in r.support],
                "bound": r.bound,
            }
            for r in self.rows
        ]
        weights = {f"{u}-{v}": float(w) for (u, v), w in zip(self.edges, self.point)}
        return json.dumps(
            {
                "value": self.value,
                "iterations": self.iterations,
                "rows_added": self.rows_added,
                "rows": rows,
                "weights": weights,
            },
            indent=2,
        )


# -- LP subroutine -----------------------------------------------------------


class IncrementalLp:
    """HiGHS model maximizing ``sum(x)`` to which rows can be appended between solves."""

    def __init__(self, num_edges: int):
        self.num_edges = num_edges
        self.h = highspy.Highs()
        for key, val in _HIGHS_OPTIONS.items():
            self.h.setOptionValue(key, val)
        inf = highspy.kHighsInf
        if num_edges:
            self.h.addVars(num_edges, np.full(num_edges, -inf), np.full(num_edges, inf))
            self.h.changeColsCost(num_edges, np.arange(num_edges, dtype=np.int32), np.ones(num_edges))
        self.h.changeObjectiveSense(highspy.ObjSense.kMaximize)

    def add_rows(self, rows: Sequence[ConstraintRow]) -> None:
        starts, index, bounds = [], [], []
        for row in rows:
            if row.kind == "nonneg":
                for e in row.support:
                    self.h.changeColBounds(int(e), 0.0, highspy.kHighsInf)
                continue
            starts.append(len(index))
            index.extend(row.support)
            bounds.append(row.bound)
        if not bounds:
            return
        k = len(bounds)
        self.h.addRows(
            k,
            np.full(k, -highspy.kHighsInf),
            np.asarray(bounds, dtype=float),
            len(index),
            np.asarray(starts, dtype=np.int32),
            np.asarray(index, dtype=np.int32),
            np.ones(len(index)),
        )

    def solve(self) -> np.ndarray:
        if self.num_edges == 0:
            return np.zeros(0)
        self.h.run()
        status = self.h.getModelStatus()
        if status != highspy.HighsModelStatus.kOptimal:
            # warm restarts occasionally stall; retry cold, then with other algorithms
            for key, val in (("simplex_strategy", 1), ("simplex_strategy", 4), ("solver", "ipm")):
                self.h.clearSolver()
                self.h.setOptionValue(key, val)
                self.h.run()
                status = self.h.getModelStatus()
                if status == highspy.HighsModelStatus.kOptimal:
                    break
            for key, val in _HIGHS_OPTIONS.items():
                self.h.setOptionValue(key, val)
        if status != highspy.HighsModelStatus.kOptimal:
            raise LpError(f"LP failed: {self.h.modelStatusToString(status)}")
        return np.asarray(self.h.getSolution().col_value, dtype=float)


def lp_maximize(rows: Sequence[ConstraintRow], num_edges: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Maximize ``sum(x)`` subject to ``rows``; returns an optimal vertex.

    Edges without a ``nonneg`` row are free below. HiGHS dual simplex with a
    fixed seed is deterministic for a fixed row order.
    """
    lp = IncrementalLp(num_edges)
    lp.add_rows(rows)
    return lp.solve()


# -- separation ----------------------------------------------------------------


def _violation(g: Graph, x: np.ndarray, s: frozenset[int]) -> float:
    total = 0.0
    for i, (u, v) in enumerate(g.edges):
        if u in s and v in s:
            total += x[i]
    return total - len(s) + 1


def separate_forest_bruteforce(g: Graph, x: np.ndarray, tol: float = DEFAULT_TOL) -> frozenset[int] | None:
    """Most violated subset row by enumeration over all ``S``, ``|S| >= 2``."""
    if g.n > BRUTE_SEPARATION_MAX_N:
        raise CapacityError(f"brute-force separation needs n <= {BRUTE_SEPARATION_MAX_N}")
    if g.m == 0:
        return None
    masks = np.arange(1 << g.n, dtype=np.int64)
    sizes = np.zeros(masks.shape[0], dtype=np.int64)
    for v in range(g.n):
        sizes += (masks >> v) & 1
    inside = np.zeros(masks.shape[0])
    for i, (u, v) in enumerate(g.edges):
        em = (1 << u) | (1 << v)
        inside += np.where((masks & em) == em, x[i], 0.0)
    viol = np.where(sizes >= 2, inside - sizes + 1, -np.inf)
    best = int(np.argmax(viol))
    if viol[best] <= tol:
        return None
    return frozenset(v for v in range(g.n) if best >> v & 1)


def _closure_max(verts: list[int], local_edges: list[tuple[int, int, float]], anchor: int) -> frozenset[int]:
    """Maximizer of ``x(E[S]) - |S|`` over ``S`` containing ``verts[anchor]``.

    Max-weight closure on the vertex network: ``|S| - x(E[S])`` equals
    ``sum_{v in S} (1 - d_x(v)/2) + x(delta(S))/2``, a cut function.
    """
    k = len(verts)
    src, snk = k, k + 1
    net = FlowNetwork(k + 2)
    wdeg = [0.0] * k
    for a, b, xe in local_edges:
        wdeg[a] += xe
        wdeg[b] += xe
        net.add_edge(a, b, xe / 2, xe / 2)
    for i in range(k):
        w = 1.0 - wdeg[i] / 2
        if w >= 0:
            net.add_edge(i, snk, w)
        else:
            net.add_edge(src, i, -w)
    net.add_edge(src, anchor, math.inf)
    net.max_flow(src, snk)
    side = net.source_side(src)
    return frozenset(verts[i] for i in range(k) if side[i])


def _maxflow_violations(g: Graph, x: np.ndarray, tol: float, limit: int) -> Iterator[frozenset[int]]:
    """Violated sets, one min-cut per anchor vertex.

    Anchors are taken in decreasing weighted degree. Once an anchor has been
    tried it is deleted, so later cuts only search sets avoiding it; together
    the cuts cover every ``S``. Vertices of weighted degree <= 1 never raise
    ``x(E[S]) - |S|`` and are peeled away after each deletion.
    """
    eps = 1e-12
    nbrs: list[dict[int, float]] = [{} for _ in range(g.n)]
    wdeg = [0.0] * g.n
    for i, (u, v) in enumerate(g.edges):
        if x[i] > eps:
            nbrs[u][v] = nbrs[v][u] = float(x[i])
            wdeg[u] += x[i]
            wdeg[v] += x[i]
    alive = [True] * g.n

    def delete(v: int) -> list[int]:
        alive[v] = False
        touched = []
        for w, xe in nbrs[v].items():
            if alive[w]:
                wdeg[w] -= xe
                touched.append(w)
        return touched

    def peel(stack: list[int]) -> None:
        while stack:
            v = stack.pop()
            if alive[v] and wdeg[v] <= 1.0:
                stack.extend(delete(v))

    peel([v for v in range(g.n) if wdeg[v] <= 1.0])
    order = sorted((v for v in range(g.n) if alive[v]), key=lambda v: (-wdeg[v], v))
    found = 0
    for v in order:
        if not alive[v]:
            continue
        members = [v]
        local = {v: 0}
        for u in members:
            for w in nbrs[u]:
                if alive[w] and w not in local:
                    local[w] = len(members)
                    members.append(w)
        if len(members) >= 2:
            local_edges = [
                (local[u], local[w], xe) for u in members for w, xe in nbrs[u].items() if u < w and w in local
            ]
            s = _closure_max(members, local_edges, 0)
            if len(s) >= 2 and _violation(g, x, s) > tol:
                yield s
                found += 1
                if found >= limit:
                    return
        peel(delete(v))


def separate_forest_maxflow(g: Graph, x: np.ndarray, tol: float = DEFAULT_TOL) -> frozenset[int] | None:
    """A violated subset row via min-cut (not necessarily the most violated).

    Returns the first violated set met while sweeping anchor vertices, or None
    when no subset row is violated by more than ``tol``.
    """
    return next(_maxflow_violations(g, np.maximum(np.asarray(x, dtype=float), 0.0), tol, 1), None)


# -- evaluators ----------------------------------------------------------------


def _initial_rows(g: Graph, delta: float) -> list[ConstraintRow]:
    rows = [ConstraintRow("nonneg", tuple(range(g.m)), 0.0)]
    incident: list[list[int]] = [[] for _ in range(g.n)]
    for i, (u, v) in enumerate(g.edges):
        incident[u].append(i)
        incident[v].append(i)
    for v in range(g.n):
        if incident[v]:
            rows.append(ConstraintRow("degree", tuple(incident[v]), float(delta)))
    for i, (u, v) in enumerate(g.edges):
        rows.append(ConstraintRow("forest", (i,), 1.0, frozenset((u, v))))
    return rows


def _components_avoiding(g: Graph, removed: set[int]) -> list[frozenset[int]]:
    label = [-1] * g.n
    out = []
    for r in range(g.n):
        if r in removed or label[r] >= 0:
            continue
        label[r] = r
        members = [r]
        stack = [r]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if w not in removed and label[w] < 0:
                    label[w] = r
                    members.append(w)
                    stack.append(w)
        out.append(frozenset(members))
    return out


def _seed_sets(g: Graph, delta: float) -> list[frozenset[int]]:
    """Subset rows that degree-bound arguments tend to need.

    A vertex of degree above Delta that splits the graph into many pieces
    forces a loss, and the LP only sees it once each piece has its own row.
    We seed components of G - v for every such v, and of G minus all of them.
    """
    high = [v for v in range(g.n) if len(g.adjacency[v]) > delta]
    if not high:
        return []
    found: dict[frozenset[int], None] = {}
    for removed in [set(high)] + [{v} for v in high]:
        for c in _components_avoiding(g, removed):
            if 3 <= len(c) < g.n:
                found.setdefault(c)
    return list(found)


def _forest_row(g: Graph, s: frozenset[int]) -> ConstraintRow:
    support = tuple(i for i, (u, v) in enumerate(g.edges) if u in s and v in s)
    return ConstraintRow("forest", support, float(len(s) - 1), s)


def _tree_point(g: Graph, edges) -> np.ndarray:
    x = np.zeros(g.m)
    for u, v in edges:
        x[g.edge_index[(min(u, v), max(u, v))]] = 1.0
    return x


def _spanning_tree_edges(g: Graph) -> list[tuple[int, int]]:
    seen = [False] * g.n
    out = []
    for r in range(g.n):
        if seen[r]:
            continue
        seen[r] = True
        stack = [r]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    out.append((u, w))
                    stack.append(w)
    return out


def _cutting_plane(
    g: Graph,
    delta: float,
    tol: float,
    max_iter: int,
    cuts_per_round: int,
    known: ForestEdgeSet | None = None,
) -> LpCertificate:
    """Cutting-plane loop. ``known`` is a feasible Delta-forest: once the
    relaxation value drops to its size, that forest is optimal and we stop."""
    rows = _initial_rows(g, delta)
    start = len(rows)
    lp = IncrementalLp(g.m)
    lp.add_rows(rows)
    seeds = _seed_sets(g, delta)
    seen: set[frozenset[int]] = set(seeds)
    seed_rows = [_forest_row(g, s) for s in seeds]
    rows.extend(seed_rows)
    lp.add_rows(seed_rows)
    x = np.zeros(g.m)
    for it in range(1, max_iter + 1):
        x = lp.solve()
        if known is not None and x.sum() <= len(known) + tol:
            point = _tree_point(g, known.edges)
            return LpCertificate(float(len(known)), point, it, len(rows) - start, rows, g.edges)
        cuts = list(_maxflow_violations(g, np.maximum(x, 0.0), tol, cuts_per_round))
        if not cuts:
            return LpCertificate(float(x.sum()), x, it, len(rows) - start, rows, g.edges)
        cuts = [s for s in cuts if s not in seen]
        if not cuts:
            raise LpError("LP point violates a row already in the model")
        new_rows = [_forest_row(g, s) for s in cuts]
        seen.update(cuts)
        rows.extend(new_rows)
        lp.add_rows(new_rows)
    cert = LpCertificate(float(x.sum()), x, max_iter, len(rows) - start, rows, g.edges)
    raise ConvergenceError(f"cutting-plane loop exceeded {max_iter} iterations", cert)


def eval_lipschitz_extension(
    g: Graph,
    delta: float,
    tol: float = DEFAULT_TOL,
    *,
    shortcuts: bool = True,
    max_iter: int | None = None,
    cuts_per_round: int = 20,
) -> LpCertificate:
    """Evaluate ``f_Delta(G)`` with a certificate.

    The LP splits over connected components. With ``shortcuts`` a component is
    answered combinatorially when ``Delta >= |C| - 1`` or when a spanning
    Delta-forest is found by the repair construction or by local search;
    either way the returned point is the indicator of a spanning Delta-forest,
    which is optimal since ``f_Delta <= f_sf``. Otherwise the local-search
    forest is handed to the cutting-plane loop as a lower bound, and the loop
    stops as soon as the relaxation meets it. Without shortcuts every
    component goes through the plain LP loop.
    """
    if not delta >= 1:
        raise ParameterError("Delta must be >= 1")
    if max_iter is None:
        max_iter = max(10 * g.n * g.n, 10)
    point = np.zeros(g.m)
    iterations = 0
    rows_added = 0
    all_rows: list[ConstraintRow] = []
    for comp in connected_components(g).groups():
        if len(comp) < 2:
            continue
        sub, mapping = induced_subgraph(g, comp)
        local_x = None
        known = None
        if shortcuts:
            if delta >= sub.n - 1:
                local_x = _tree_point(sub, _spanning_tree_edges(sub))
            else:
                forest = try_bounded_spanning_forest(sub, delta)
                if forest is None:
                    known = bounded_forest_heuristic(sub, delta)
                    if len(known) == sub.n - 1:
                        forest = known
                if forest is not None:
                    local_x = _tree_point(sub, forest.edges)
        if local_x is None:
            try:
                cert = _cutting_plane(sub, delta, tol, max_iter, cuts_per_round, known)
            except ConvergenceError as exc:
                raise ConvergenceError(str(exc), exc.certificate) from None
            local_x = cert.point
            iterations += cert.iterations
            rows_added += cert.rows_added
            for r in cert.rows:
                all_rows.append(_lift_row(r, sub, mapping, g))
        for i, (u, v) in enumerate(sub.edges):
            point[g.edge_index[(mapping[u], mapping[v])]] = local_x[i]
    return LpCertificate(float(point.sum()), point, iterations, rows_added, all_rows, g.edges)


def _lift_row(row: ConstraintRow, sub: Graph, mapping: tuple[int, ...], g: Graph) -> ConstraintRow:
    support = tuple(g.edge_index[(mapping[sub.edges[i][0]], mapping[sub.edges[i][1]])] for i in row.support)
    witness = frozenset(mapping[v] for v in row.witness) if row.witness is not None else None
    return ConstraintRow(row.kind, support, row.bound, witness)


def all_subset_rows(g: Graph) -> list[ConstraintRow]:
    """Every subset row with non-empty support, keeping the tightest ``|S|-1`` per support."""
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(masks.shape[0], dtype=np.int64)
    for v in range(n):
        sizes += (masks >> v) & 1
    member = np.zeros((masks.shape[0], g.m), dtype=bool)
    for i, (u, v) in enumerate(g.edges):
        em = (1 << u) | (1 << v)
        member[:, i] = (masks & em) == em
    best: dict[bytes, tuple[int, int]] = {}
    for mask in range(1 << n):
        if sizes[mask] < 2:
            continue
        row = member[mask]
        if not row.any():
            continue
        key = np.packbits(row).tobytes()
        prev = best.get(key)
        if prev is None or sizes[mask] < prev[0]:
            best[key] = (int(sizes[mask]), mask)
    rows = []
    for size, mask in sorted(best.values(), key=lambda t: t[1]):
        support = tuple(int(i) for i in np.flatnonzero(member[mask]))
        witness = frozenset(v for v in range(n) if mask >> v & 1)
        rows.append(ConstraintRow("forest", support, float(size - 1), witness))
    return rows


def eval_extension_bruteforce(g: Graph, delta: float, tol: float = DEFAULT_TOL) -> float:
    """``f_Delta(G)`` from the LP with every subset row written out (``n <= 14``)."""
    if g.n > BRUTE_EXTENSION_MAX_N:
        raise CapacityError(f"brute-force extension needs n <= {BRUTE_EXTENSION_MAX_N}")
    if not delta > 0:
        raise ParameterError("Delta must be positive")
    if g.m == 0:
        return 0.0
    rows = [r for r in _initial_rows(g, delta) if r.kind != "forest"] + all_subset_rows(g)
    return float(lp_maximize(rows, g.m, tol).sum())


def check_certificate(g: Graph, delta: float, cert: LpCertificate, tol: float = DEFAULT_TOL) -> bool:
    """Post-hoc feasibility check of a certificate point against all three row families."""
    x = cert.point
    if np.any(x < -tol):
        return False
    load = np.zeros(g.n)
    for i, (u, v) in enumerate(g.edges):
        load[u] += x[i]
        load[v] += x[i]
    if np.any(load > delta + tol):
        return False
    if g.n <= BRUTE_SEPARATION_MAX_N:
        return separate_forest_bruteforce(g, np.maximum(x, 0.0), tol) is None
    return separate_forest_maxflow(g, x, tol) is None
