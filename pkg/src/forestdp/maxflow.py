"""Dinic's maximum flow on real capacities.

scipy's ``maximum_flow`` only accepts integer capacities, and the separation
oracle works with fractional LP points, so we carry our own.
"""

from __future__ import annotations

from collections import deque

EPS = 1e-12


class FlowNetwork:
    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self.head: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[float] = []

    def add_edge(self, u: int, v: int, cap: float, rev_cap: float = 0.0) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(rev_cap)

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.num_nodes
        level[s] = 0
        q = deque([s])
        to, cap, head = self.to, self.cap, self.head
        while q:
            u = q.popleft()
            for e in head[u]:
                if cap[e] > EPS and level[to[e]] < 0:
                    level[to[e]] = level[u] + 1
                    q.append(to[e])
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int) -> float:
        total = 0.0
        to, cap, head = self.to, self.cap, self.head
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            ptr = [0] * self.num_nodes
            while True:
                # iterative blocking-flow DFS
                path: list[int] = []
                u = s
                while u != t:
                    adv = False
                    edges = head[u]
                    while ptr[u] < len(edges):
                        e = edges[ptr[u]]
                        w = to[e]
                        if cap[e] > EPS and level[w] == level[u] + 1:
                            path.append(e)
                            u = w
                            adv = True
                            break
                        ptr[u] += 1
                    if not adv:
                        if u == s:
                            break
                        level[u] = -1
                        e = path.pop()
                        u = to[e ^ 1]
                        ptr[u] += 1
                if u != t:
                    break
                push = min(cap[e] for e in path)
                for e in path:
                    cap[e] -= push
                    cap[e ^ 1] += push
                total += push

    def source_side(self, s: int) -> list[bool]:
        """Nodes reachable from ``s`` in the residual network (call after max_flow)."""
        seen = [False] * self.num_nodes
        seen[s] = True
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                w = self.to[e]
                if self.cap[e] > EPS and not seen[w]:
                    seen[w] = True
                    q.append(w)
        return seen
