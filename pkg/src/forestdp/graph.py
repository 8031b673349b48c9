"""Simple undirected graphs over dense integer ids, plus the helpers built on them.

Vertices are ``0..n-1``. A :class:`Graph` is immutable and hashable, which
lets the extension evaluators memoize on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphParseError, VertexRangeError


class UnionFind:
    """Disjoint sets over ``0..size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.count = size

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph.

    ``adjacency[v]`` is the sorted tuple of neighbours of ``v``. Use
    :meth:`from_edges` rather than the raw constructor; it validates and
    normalizes.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise VertexRangeError(f"edge ({u}, {v}) outside [0, {n})")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, tuple(() for _ in range(n)))

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as ``(u, v)`` with ``u < v``, in lexicographic order."""
        return tuple((u, v) for u in range(self.n) for v in self.adjacency[u] if u < v)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def _adjsets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Neighbourhood of each vertex as an int bitmask."""
        return tuple(sum(1 << w for w in a) for a in self.adjacency)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def add_vertex(self, neighbors: Iterable[int] = ()) -> "Graph":
        """Node-neighbour of ``self`` with a new vertex ``n`` joined to ``neighbors``."""
        new = self.n
        return Graph.from_edges(new + 1, list(self.edges) + [(new, int(w)) for w in neighbors])

    def remove_vertex(self, v: int) -> "Graph":
        keep = [u for u in range(self.n) if u != v]
        return induced_subgraph(self, keep)[0]


@dataclass(frozen=True)
class ComponentLabeling:
    labels: tuple[int, ...]
    count: int

    def groups(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for v, c in enumerate(self.labels):
            out[c].append(v)
        return out


# -- parsing ---------------------------------------------------------------


def parse_edge_list(text: bytes | str) -> Graph:
    """Parse the edge-list format: a vertex-count line, then one ``u v`` per line.

    Blank lines and lines starting with ``#`` are skipped. Duplicate edges
    (in either orientation) collapse; self-loops are rejected.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    n = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 1:
                raise GraphParseError("expected a single vertex count", lineno)
            try:
                n = int(parts[0])
            except ValueError:
                raise GraphParseError(f"bad vertex count {parts[0]!r}", lineno) from None
            if n < 0:
                raise GraphParseError("negative vertex count", lineno)
            continue
        if len(parts) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer vertex id in {line!r}", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(f"line {lineno}: vertex id out of range [0, {n})")
        if u == v:
            raise GraphParseError(f"self-loop at vertex {u}", lineno)
        edges.append((u, v))
    if n is None:
        raise GraphParseError("missing vertex count", None)
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [str(g.n)] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


# -- connectivity ----------------------------------------------------------


def connected_components(g: Graph) -> ComponentLabeling:
    """Label components by union-find; ids follow the smallest member's order."""
    uf = UnionFind(g.n)
    for u, v in g.edges:
        uf.union(u, v)
    relabel: dict[int, int] = {}
    labels = []
    for v in range(g.n):
        r = uf.find(v)
        if r not in relabel:
            relabel[r] = len(relabel)
        labels.append(relabel[r])
    return ComponentLabeling(tuple(labels), len(relabel))


def spanning_forest_size(g: Graph) -> int:
    """Edges in a spanning forest: ``n - (number of components)``."""
    return g.n - connected_components(g).count


def components_of_mask(g: Graph, mask: int) -> int:
    """Component count of the subgraph induced by the bitmask ``mask``."""
    masks = g.masks
    count = 0
    remaining = mask
    while remaining:
        low = remaining & -remaining
        frontier = low
        seen = low
        while frontier:
            b = frontier & -frontier
            frontier ^= b
            new = masks[b.bit_length() - 1] & mask & ~seen
            seen |= new
            frontier |= new
        remaining &= ~seen
        count += 1
    return count


def sf_of_mask(g: Graph, mask: int) -> int:
    """Spanning-forest size of the subgraph induced by ``mask``."""
    return bin(mask).count("1") - components_of_mask(g, mask)


# -- induced subgraphs and the poset ---------------------------------------


def induced_subgraph(g: Graph, vertices: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Subgraph induced by ``vertices``, relabelled ``0..k-1`` in increasing id order.

    Returns the graph and ``mapping`` with ``mapping[new] == old``.
    """
    mapping = tuple(sorted(set(int(v) for v in vertices)))
    for v in mapping:
        if not 0 <= v < g.n:
            raise VertexRangeError(f"vertex {v} outside [0, {g.n})")
    new_id = {old: i for i, old in enumerate(mapping)}
    adj = tuple(
        tuple(sorted(new_id[w] for w in g.adjacency[old] if w in new_id)) for old in mapping
    )
    return Graph(len(mapping), adj), mapping


def mask_subgraph(g: Graph, mask: int) -> Graph:
    return induced_subgraph(g, [v for v in range(g.n) if mask >> v & 1])[0]


def node_distance_in_poset(a: Iterable[int], b: Iterable[int]) -> int:
    """Node distance between two induced subgraphs of one graph: ``|A xor B|``."""
    return len(set(a) ^ set(b))


# -- random models ---------------------------------------------------------


def gen_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi G(n, p): each pair is an edge independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), iv[keep].tolist()))


def geometric_from_points(points: Sequence[Sequence[float]], r: float) -> Graph:
    """Join every pair of points at Euclidean distance at most ``r``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n < 2:
        return Graph.empty(n)
    diff = pts[:, None, :] - pts[None, :, :]
    close = np.einsum("ijk,ijk->ij", diff, diff) <= r * r
    iu, iv = np.triu_indices(n, k=1)
    keep = close[iu, iv]
    return Graph.from_edges(n, zip(iu[keep].tolist(), iv[keep].tolist()))


def gen_geometric(n: int, r: float, rng: np.random.Generator) -> Graph:
    """Random geometric graph: ``n`` uniform points in the unit square, radius ``r``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    return geometric_from_points(rng.random((n, 2)), r)
