"""Induced stars, down-sensitivity of the spanning-forest size, and the local
repair procedure that turns a graph without induced Delta-stars into a
spanning forest of maximum degree Delta.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapacityError, ContractViolation
from .graph import Graph, UnionFind, connected_components, mask_subgraph

EXACT_STAR_DEGREE_CAP = 30
BRUTEFORCE_DS_MAX_N = 12
DELTA_STAR_MAX_N = 9


# -- induced stars -----------------------------------------------------------


def _max_independent_set(cand: int, masks: dict[int, int]) -> int:
    """Maximum independent set inside bitmask ``cand`` (returned as a bitmask).

    Branch and bound: degree-0/1 vertices are taken greedily, otherwise branch
    on a maximum-degree vertex. The bound is ``|chosen| + |candidates|``.
    """
    best = 0
    best_size = 0

    def rec(chosen: int, size: int, cand: int) -> None:
        nonlocal best, best_size
        while cand:
            # forced moves: a vertex of degree <= 1 in cand is always safe to take
            forced = 0
            c = cand
            while c:
                b = c & -c
                c ^= b
                if bin(masks[b] & cand).count("1") <= 1:
                    forced = b
                    break
            if not forced:
                break
            chosen |= forced
            size += 1
            cand &= ~(forced | masks[forced])
        if not cand:
            if size > best_size:
                best, best_size = chosen, size
            return
        if size + bin(cand).count("1") <= best_size:
            return
        pivot, pivot_deg = 0, -1
        c = cand
        while c:
            b = c & -c
            c ^= b
            d = bin(masks[b] & cand).count("1")
            if d > pivot_deg:
                pivot, pivot_deg = b, d
        rec(chosen | pivot, size + 1, cand & ~(pivot | masks[pivot]))
        rec(chosen, size, cand & ~pivot)

    rec(0, 0, cand)
    return best


def largest_induced_star_exact(g: Graph) -> tuple[int, frozenset[int]]:
    """Exact ``s(G)`` with a witness ``{center} | leaves``.

    ``s(G)`` is the largest ``k`` such that some vertex has ``k`` pairwise
    non-adjacent neighbours. Graphs without edges give ``(0, frozenset())``.
    Raises :class:`CapacityError` if some neighbourhood exceeds
    ``EXACT_STAR_DEGREE_CAP`` vertices and ``n`` does too.
    """
    if g.n > EXACT_STAR_DEGREE_CAP and g.max_degree() > EXACT_STAR_DEGREE_CAP:
        raise CapacityError(
            f"exact induced-star search needs max degree <= {EXACT_STAR_DEGREE_CAP} "
            f"(got {g.max_degree()}); use largest_induced_star_greedy for a lower bound"
        )
    best, witness = 0, frozenset()
    for v in range(g.n):
        nbrs = g.adjacency[v]
        if len(nbrs) <= best:
            continue
        # local bit i <-> neighbour nbrs[i]
        local = {w: i for i, w in enumerate(nbrs)}
        masks = {}
        for i, w in enumerate(nbrs):
            mk = 0
            for x in g.adjacency[w]:
                j = local.get(x)
                if j is not None:
                    mk |= 1 << j
            masks[1 << i] = mk
        mis = _max_independent_set((1 << len(nbrs)) - 1, masks)
        size = bin(mis).count("1")
        if size > best:
            leaves = [nbrs[i] for i in range(len(nbrs)) if mis >> i & 1]
            best, witness = size, frozenset([v, *leaves])
    return best, witness


def largest_induced_star_greedy(g: Graph, rng: np.random.Generator, restarts: int = 8) -> int:
    """Lower bound on ``s(G)`` from randomized greedy maximal independent sets."""
    best = 0
    for v in range(g.n):
        nbrs = list(g.adjacency[v])
        if len(nbrs) <= best:
            continue
        for _ in range(restarts):
            order = rng.permutation(len(nbrs))
            chosen: list[int] = []
            for i in order:
                w = nbrs[i]
                if not any(g.has_edge(w, c) for c in chosen):
                    chosen.append(w)
            best = max(best, len(chosen))
    return best


def down_sensitivity_sf(g: Graph) -> int:
    """Down-sensitivity of the spanning-forest size, which equals ``s(G)``."""
    return largest_induced_star_exact(g)[0]


def down_sensitivity_bruteforce(f: Callable[[Graph], float], g: Graph) -> float:
    """``max |f(H') - f(H)|`` over node-neighbouring induced subgraphs ``H < H' <= G``.

    Enumerates all ``2^n`` induced subgraphs, so ``n`` is capped at 12.
    """
    if g.n > BRUTEFORCE_DS_MAX_N:
        raise CapacityError(f"brute-force down-sensitivity needs n <= {BRUTEFORCE_DS_MAX_N}")
    vals = np.array([f(mask_subgraph(g, mask)) for mask in range(1 << g.n)], dtype=float)
    return _ds_from_values(vals, g.n)


def _ds_from_values(vals: np.ndarray, n: int) -> float:
    best = 0.0
    idx = np.arange(1 << n)
    for v in range(n):
        with_v = idx[(idx >> v) & 1 == 1]
        if with_v.size:
            best = max(best, float(np.max(np.abs(vals[with_v] - vals[with_v ^ (1 << v)]))))
    return best


# -- forests -----------------------------------------------------------------


class ForestEdgeSet:
    """Mutable edge set of a forest on ``0..n-1`` with per-vertex degrees."""

    def __init__(self, n: int, edges=()):
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            self.add(u, v)

    def add(self, u: int, v: int) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove(self, u: int, v: int) -> None:
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def __len__(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def copy(self) -> "ForestEdgeSet":
        return ForestEdgeSet(self.n, self.edges)

    def is_acyclic(self) -> bool:
        uf = UnionFind(self.n)
        return all(uf.union(u, v) for u, v in self.edges)


def is_spanning_forest(g: Graph, edges) -> bool:
    """True iff ``edges`` is an acyclic subset of ``E(G)`` with ``G``'s components."""
    uf = UnionFind(g.n)
    count = 0
    for u, v in edges:
        if not g.has_edge(u, v) or not uf.union(u, v):
            return False
        count += 1
    return count == g.n - connected_components(g).count


@dataclass(frozen=True)
class RepairStep:
    vertex: int
    a: int
    b: int
    edges: frozenset[tuple[int, int]]


@dataclass
class RepairTrace:
    """Output sequence ``(v_i, F_i)`` of the repair loop.

    ``v0``/``initial`` hold ``(v_0, F_0)``; ``steps[i-1]`` holds ``(v_i, F_i)``.
    """

    v0: int
    initial: frozenset[tuple[int, int]]
    steps: list[RepairStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def sequence(self) -> list[tuple[int, frozenset[tuple[int, int]]]]:
        return [(self.v0, self.initial)] + [(s.vertex, s.edges) for s in self.steps]


def _int_bound(delta: float) -> int:
    return int(math.floor(delta + 1e-9))


def _repair(g: Graph, bound: int, prev: int, forest: ForestEdgeSet, trace: RepairTrace | None) -> None:
    over = [v for v in range(forest.n) if forest.degree(v) > bound]
    if not over:
        return
    if len(over) > 1 or forest.degree(over[0]) > bound + 1:
        raise ContractViolation("initial forest must have at most one vertex of degree Delta+1")
    v = over[0]
    for _ in range(forest.n + 1):
        nbrs = sorted(w for w in forest.adj[v] if w != prev)[:bound]
        pair = None
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                if g.has_edge(a, b):
                    pair = (a, b)
                    break
            if pair:
                break
        if pair is None:
            raise ContractViolation(
                f"no adjacent pair among {bound} forest neighbours of {v}; "
                f"the graph has an induced {bound}-star"
            )
        a, b = pair
        forest.remove(v, b)
        forest.add(a, b)
        if trace is not None:
            trace.steps.append(RepairStep(v, a, b, forest.edges))
        if forest.degree(a) <= bound:
            return
        prev, v = v, a
    raise ContractViolation("repair did not terminate within n steps")


def repair_spanning_forest(
    g: Graph, delta: int, v0: int, f0
) -> tuple[ForestEdgeSet, RepairTrace]:
    """Run local repairs until every forest degree is at most ``delta``.

    ``f0`` is a spanning forest of ``g`` (edge pairs or :class:`ForestEdgeSet`)
    with at most one vertex of degree ``delta + 1``; ``v0`` is the vertex just
    attached. At each step the over-full vertex ``v_i`` drops its edge to
    ``b_i`` and ``a_i`` is joined to ``b_i``, where ``(a_i, b_i)`` is the
    lexicographically first adjacent pair among the ``delta`` smallest forest
    neighbours of ``v_i`` other than ``v_{i-1}``.
    """
    forest = f0.copy() if isinstance(f0, ForestEdgeSet) else ForestEdgeSet(g.n, f0)
    trace = RepairTrace(v0, forest.edges)
    _repair(g, _int_bound(delta), v0, forest, trace)
    return forest, trace


def check_repair_trace(g: Graph, delta: int, trace: RepairTrace) -> list[str]:
    """Violations of the four trace properties; empty when the trace is sound.

    (a) every ``F_i`` is a spanning forest of ``g``; (b) at most one vertex of
    ``F_i`` has degree ``delta + 1`` and none more; (c) ``(v_i, v_{i+1})`` lies
    in both ``F_i`` and ``F_{i+1}``; (d) ``v_0..v_i`` are distinct and form a
    path in ``F_i``.
    """
    problems = []
    seq = trace.sequence()
    verts = [v for v, _ in seq]
    for i, (v, edges) in enumerate(seq):
        if not is_spanning_forest(g, edges):
            problems.append(f"(a) F_{i} is not a spanning forest")
        deg = [0] * g.n
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        over = [w for w in range(g.n) if deg[w] > delta]
        if len(over) > 1 or any(deg[w] > delta + 1 for w in over):
            problems.append(f"(b) F_{i} has degrees {[deg[w] for w in over]} above {delta}")
        if i + 1 < len(seq):
            e = tuple(sorted((v, verts[i + 1])))
            if e not in edges or e not in seq[i + 1][1]:
                problems.append(f"(c) edge {e} missing from F_{i} or F_{i + 1}")
        prefix = verts[: i + 1]
        if len(set(prefix)) != len(prefix):
            problems.append(f"(d) v_0..v_{i} repeat a vertex")
        elif any(tuple(sorted(p)) not in edges for p in zip(prefix, prefix[1:])):
            problems.append(f"(d) v_0..v_{i} is not a path in F_{i}")
    return problems


def leaf_elimination_order(g: Graph) -> list[int]:
    """Vertices in an order where each is a non-cut vertex of those not yet removed.

    Peels leaves (or isolated vertices) of a DFS spanning forest, smallest id
    first; the remaining tree edges still span what is left, so every removed
    vertex is a non-cut vertex at its time of removal.
    """
    tree_adj: list[list[int]] = [[] for _ in range(g.n)]
    seen = [False] * g.n
    for root in range(g.n):
        if seen[root]:
            continue
        seen[root] = True
        stack = [(root, iter(g.adjacency[root]))]
        while stack:
            u, it = stack[-1]
            for w in it:
                if not seen[w]:
                    seen[w] = True
                    tree_adj[u].append(w)
                    tree_adj[w].append(u)
                    stack.append((w, iter(g.adjacency[w])))
                    break
            else:
                stack.pop()
    tdeg = [len(a) for a in tree_adj]
    removed = [False] * g.n
    heap = [v for v in range(g.n) if tdeg[v] <= 1]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        if removed[v]:
            continue
        removed[v] = True
        order.append(v)
        for w in tree_adj[v]:
            if not removed[w]:
                tdeg[w] -= 1
                if tdeg[w] <= 1:
                    heapq.heappush(heap, w)
    return order


def build_bounded_spanning_forest(
    g: Graph, delta: float, traces: list[RepairTrace] | None = None
) -> ForestEdgeSet:
    """Spanning forest with maximum degree ``<= delta`` for graphs with ``s(G) < delta``.

    Vertices are inserted in reverse leaf-elimination order; each new vertex is
    joined to its present neighbour of smallest forest degree and the forest is
    repaired. Raises :class:`ContractViolation` if a repair finds no adjacent
    pair, which certifies an induced star of size ``floor(delta)``. If
    ``traces`` is given, the trace of every repair is appended to it.
    """
    bound = _int_bound(delta)
    forest = ForestEdgeSet(g.n)
    if g.m == 0:
        return forest
    if bound < 1:
        raise ContractViolation("a graph with edges has no spanning forest of degree < 1")
    present = [False] * g.n
    for v0 in reversed(leaf_elimination_order(g)):
        present[v0] = True
        nbrs = [w for w in g.adjacency[v0] if present[w]]
        if not nbrs:
            continue
        v1 = min(nbrs, key=lambda w: (forest.degree(w), w))
        forest.add(v0, v1)
        if forest.degree(v1) > bound:
            trace = None
            if traces is not None:
                trace = RepairTrace(v0, forest.edges)
                traces.append(trace)
            _repair(g, bound, v0, forest, trace)
    if forest.max_degree() > bound or not is_spanning_forest(g, forest.edges):
        raise ContractViolation("repair produced an invalid forest")
    return forest


def try_bounded_spanning_forest(g: Graph, delta: float) -> ForestEdgeSet | None:
    """Like :func:`build_bounded_spanning_forest` but returns None on failure.

    Success does not require ``s(G) < delta``; failure does not prove that no
    spanning delta-forest exists.
    """
    try:
        return build_bounded_spanning_forest(g, delta)
    except ContractViolation:
        return None


# -- local search for low-degree forests -------------------------------------


def _greedy_spanning_forest(g: Graph) -> ForestEdgeSet:
    """Insertion step of the builder without repairs: may exceed any bound."""
    forest = ForestEdgeSet(g.n)
    present = [False] * g.n
    for v0 in reversed(leaf_elimination_order(g)):
        present[v0] = True
        nbrs = [w for w in g.adjacency[v0] if present[w]]
        if nbrs:
            forest.add(v0, min(nbrs, key=lambda w: (forest.degree(w), w)))
    return forest


def _side(forest: ForestEdgeSet, start: int, cut: int) -> set[int]:
    """Tree vertices reachable from ``start`` without stepping onto ``cut``."""
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in forest.adj[u]:
            if w != cut and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def _unload_once(g: Graph, forest: ForestEdgeSet, bound: int, v: int) -> bool:
    """Swap one forest edge at overloaded ``v`` for a non-forest edge between
    two vertices with spare degree that reconnects the two sides."""
    for w in sorted(forest.adj[v]):
        far = _side(forest, w, v)
        for b in far:
            spare_b = bound - forest.degree(b) + (b == w)
            if spare_b < 1:
                continue
            for a in g.adjacency[b]:
                if a == v or a in far or a in forest.adj[b]:
                    continue
                if forest.degree(a) < bound:
                    forest.remove(v, w)
                    forest.add(a, b)
                    return True
    return False


def low_degree_spanning_forest(g: Graph, delta: float) -> ForestEdgeSet:
    """Spanning forest whose degrees exceed ``floor(delta)`` as little as local search manages.

    Starts from the builder's insertion order and repeatedly applies single
    edge swaps that lower an overloaded degree without overloading anyone else.
    """
    bound = _int_bound(delta)
    forest = _greedy_spanning_forest(g)
    if bound < 1:
        return forest
    improved = True
    while improved:
        improved = False
        for v in range(g.n):
            while forest.degree(v) > bound and _unload_once(g, forest, bound, v):
                improved = True
    return forest


def bounded_forest_heuristic(g: Graph, delta: float) -> ForestEdgeSet:
    """A forest with maximum degree ``<= floor(delta)``, large but not necessarily maximum.

    Overload left by :func:`low_degree_spanning_forest` is shed by deleting
    edges, preferring edges whose both ends are overloaded.
    """
    bound = _int_bound(delta)
    forest = low_degree_spanning_forest(g, delta)
    if bound < 1:
        return ForestEdgeSet(g.n)
    for v in range(g.n):
        while forest.degree(v) > bound:
            w = max(forest.adj[v], key=lambda u: (forest.degree(u) > bound, -u))
            forest.remove(v, w)
    return forest


# -- exact minimum-degree spanning forest ------------------------------------


def _component_has_bounded_tree(edges: list[tuple[int, int]], verts: list[int], bound: int) -> bool:
    local = {v: i for i, v in enumerate(verts)}
    es = [(local[u], local[v]) for u, v in edges]
    k = len(verts)
    target = k - 1
    if target == 0:
        return True

    def connected(chosen: list[int], start: int) -> bool:
        uf = UnionFind(k)
        for i in chosen:
            uf.union(*es[i])
        for u, v in es[start:]:
            uf.union(u, v)
        return uf.count == 1

    deg = [0] * k

    def rec(i: int, chosen: list[int], uf_parent: list[int]) -> bool:
        if len(chosen) == target:
            return True
        if len(es) - i < target - len(chosen):
            return False
        if not connected(chosen, i):
            return False
        u, v = es[i]
        if deg[u] < bound and deg[v] < bound:
            uf = UnionFind(k)
            uf.parent = list(uf_parent)
            if uf.union(u, v):
                deg[u] += 1
                deg[v] += 1
                chosen.append(i)
                if rec(i + 1, chosen, uf.parent):
                    return True
                chosen.pop()
                deg[u] -= 1
                deg[v] -= 1
        return rec(i + 1, chosen, uf_parent)

    return rec(0, [], list(range(k)))


def has_bounded_spanning_forest_exact(g: Graph, delta: int) -> bool:
    """Exhaustive test for a spanning forest with maximum degree ``<= delta``."""
    if g.n > DELTA_STAR_MAX_N:
        raise CapacityError(f"exact spanning-forest search needs n <= {DELTA_STAR_MAX_N}")
    if g.m == 0:
        return True
    if delta < 1:
        return False
    labels = connected_components(g)
    for comp in labels.groups():
        if len(comp) < 2:
            continue
        cset = set(comp)
        edges = [(u, v) for u, v in g.edges if u in cset]
        if not _component_has_bounded_tree(edges, comp, delta):
            return False
    return True


def delta_star_exact(g: Graph) -> int:
    """Smallest maximum degree over all spanning forests of ``g`` (``n <= 9``)."""
    if g.n > DELTA_STAR_MAX_N:
        raise CapacityError(f"exact Delta* needs n <= {DELTA_STAR_MAX_N}")
    if g.m == 0:
        return 0
    for d in range(1, g.max_degree() + 1):
        if has_bounded_spanning_forest_exact(g, d):
            return d
    return g.max_degree()
