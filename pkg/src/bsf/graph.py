"""Graph containers and the primitive algorithms every solver builds on.

Weights are non-negative integers.  Edge ids are positions in the edge list
given at construction, and every ``Tree`` refers to its host graph's edges by
those ids.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DisconnectedGraph, NotATree

INF = math.inf  # capacity sentinel for max-flow; never summed with finite values


class UnionFind:
    __slots__ = ("parent", "size")

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, u):
        parent = self.parent
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def union(self, u, v):
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return False
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.size[ru] += self.size[rv]
        return True


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple  # tuple of (u, v, w)
    adjacency: tuple = field(init=False, repr=False, compare=False)
    _pair_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v), int(w)) for u, v, w in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        adj = [[] for _ in range(self.n)]
        pairs = {}
        for eid, (u, v, w) in enumerate(edges):
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge {eid} has endpoint outside [0, {self.n})")
            if u == v:
                raise ValueError(f"edge {eid} is a self-loop")
            if w < 0 or w >= 2**63:
                raise ValueError(f"edge {eid} weight {w} not a non-negative 64-bit integer")
            key = (min(u, v), max(u, v))
            if key in pairs:
                raise ValueError(f"edge {eid} duplicates edge {pairs[key]}")
            pairs[key] = eid
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))
        object.__setattr__(self, "_pair_index", pairs)

    @property
    def m(self):
        return len(self.edges)

    def weight(self, eid):
        return self.edges[eid][2]

    def edge_id(self, u, v):
        """Edge id joining ``u`` and ``v`` or ``None``."""
        return self._pair_index.get((min(u, v), max(u, v)))

    def total_weight(self, edge_ids: Iterable[int] | None = None) -> int:
        if edge_ids is None:
            return sum(w for _, _, w in self.edges)
        return sum(self.edges[e][2] for e in edge_ids)

    def degree(self, v):
        return len(self.adjacency[v])

    def without_edges(self, removed) -> "WeightedGraph":
        removed = set(removed)
        return WeightedGraph(self.n, tuple(e for i, e in enumerate(self.edges) if i not in removed))


@dataclass(frozen=True)
class Tree:
    """A tree of a host graph: sorted vertex tuple, frozen edge-id set, weight."""

    vertices: tuple
    edges: frozenset
    weight: int

    @classmethod
    def from_edges(cls, g: WeightedGraph, vertices: Iterable[int], edge_ids: Iterable[int]) -> "Tree":
        edges = frozenset(edge_ids)
        return cls(tuple(sorted(set(vertices))), edges, g.total_weight(edges))

    @classmethod
    def singleton(cls, v) -> "Tree":
        return cls((v,), frozenset(), 0)

    @property
    def key(self):
        return (self.vertices, tuple(sorted(self.edges)))

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        # vertices is sorted; trees are small so a linear scan is fine
        return v in self.vertices

    def validate(self, g: WeightedGraph):
        vs = set(self.vertices)
        if not vs:
            raise NotATree("tree has no vertices")
        if len(self.edges) != len(vs) - 1:
            raise NotATree(f"{len(self.edges)} edges for {len(vs)} vertices")
        uf = UnionFind(g.n)
        for e in self.edges:
            u, v, _ = g.edges[e]
            if u not in vs or v not in vs:
                raise NotATree(f"edge {e} leaves the vertex set")
            if not uf.union(u, v):
                raise NotATree(f"edge {e} closes a cycle")
        if self.weight != g.total_weight(self.edges):
            raise NotATree("stored weight differs from edge weights")


@dataclass(frozen=True)
class SpanningKForest:
    trees: tuple

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))

    @property
    def k(self):
        return len(self.trees)

    @property
    def value_minmax(self) -> int:
        return max(t.weight for t in self.trees)

    @property
    def value_maxmin(self) -> int:
        return min(t.weight for t in self.trees)

    def edge_ids(self):
        return frozenset().union(*(t.edges for t in self.trees))

    def validate(self, g: WeightedGraph, k: int | None = None):
        if k is not None and len(self.trees) != k:
            raise NotATree(f"forest has {len(self.trees)} trees, expected {k}")
        seen = set()
        for t in self.trees:
            t.validate(g)
            if seen.intersection(t.vertices):
                raise NotATree("trees share a vertex")
            seen.update(t.vertices)
        if seen != set(range(g.n)):
            raise NotATree("forest does not span every vertex")


def _kruskal(g: WeightedGraph, order, vertices=None):
    """Greedy forest over ``order`` restricted to ``vertices`` (None = all)."""
    uf = UnionFind(g.n)
    chosen = []
    if vertices is None:
        need = g.n - 1
        inside = None
    else:
        inside = set(vertices)
        need = len(inside) - 1
    for eid in order:
        if len(chosen) >= need:
            break
        u, v, _ = g.edges[eid]
        if inside is not None and (u not in inside or v not in inside):
            continue
        if uf.union(u, v):
            chosen.append(eid)
    return chosen, need


def _min_order(g):
    return sorted(range(g.m), key=lambda e: (g.edges[e][2], e))


def kruskal_mst(g: WeightedGraph) -> Tree:
    """Minimum spanning tree; equal weights are taken in increasing edge id."""
    chosen, need = _kruskal(g, _min_order(g))
    if g.n == 0 or len(chosen) != need:
        raise DisconnectedGraph(f"graph with {g.n} vertices is not connected")
    return Tree.from_edges(g, range(g.n), chosen)


def max_spanning_tree(g: WeightedGraph) -> Tree:
    order = sorted(range(g.m), key=lambda e: (-g.edges[e][2], e))
    chosen, need = _kruskal(g, order)
    if g.n == 0 or len(chosen) != need:
        raise DisconnectedGraph(f"graph with {g.n} vertices is not connected")
    return Tree.from_edges(g, range(g.n), chosen)


def is_connected(g: WeightedGraph, subset: Iterable[int] | None = None) -> bool:
    inside = set(range(g.n)) if subset is None else set(subset)
    if not inside:
        return False
    start = next(iter(inside))
    seen = {start}
    queue = [start]
    while queue:
        u = queue.pop()
        for v, _ in g.adjacency[u]:
            if v in inside and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(inside)


def induced_mst(g: WeightedGraph, subset: Iterable[int], *, maximize=False) -> Tree | None:
    """MST of ``g[subset]``, or ``None`` when the induced subgraph is disconnected."""
    inside = set(subset)
    if not inside:
        raise ValueError("subset must be non-empty")
    if len(inside) == 1:
        return Tree.singleton(next(iter(inside)))
    cand = [e for e in range(g.m) if g.edges[e][0] in inside and g.edges[e][1] in inside]
    if maximize:
        cand.sort(key=lambda e: (-g.edges[e][2], e))
    else:
        cand.sort(key=lambda e: (g.edges[e][2], e))
    chosen, need = _kruskal(g, cand, inside)
    if len(chosen) != need:
        return None
    return Tree.from_edges(g, inside, chosen)


def components(g: WeightedGraph, edge_ids: Iterable[int]) -> list[list[int]]:
    """Vertex sets of the connected components of ``(V, edge_ids)``."""
    uf = UnionFind(g.n)
    for e in edge_ids:
        u, v, _ = g.edges[e]
        uf.union(u, v)
    groups = {}
    for v in range(g.n):
        groups.setdefault(uf.find(v), []).append(v)
    return sorted(groups.values())


def forest_from_edges(g: WeightedGraph, edge_ids: Iterable[int]) -> SpanningKForest:
    """Split an acyclic edge set into its trees (isolated vertices become singletons)."""
    edge_ids = list(edge_ids)
    comps = components(g, edge_ids)
    owner = {}
    for idx, comp in enumerate(comps):
        for v in comp:
            owner[v] = idx
    tree_edges = [[] for _ in comps]
    for e in edge_ids:
        tree_edges[owner[g.edges[e][0]]].append(e)
    trees = [Tree.from_edges(g, comp, es) for comp, es in zip(comps, tree_edges)]
    forest = SpanningKForest(trees)
    forest.validate(g)
    return forest


# ---------------------------------------------------------------------------
# max-flow / min-cut


@dataclass
class FlowDigraph:
    n: int
    source: int
    sink: int
    arcs: list = field(default_factory=list)  # (tail, head, capacity)

    def __post_init__(self):
        if self.source == self.sink:
            raise ValueError("source and sink must differ")

    def add_arc(self, tail, head, capacity):
        if capacity != INF and capacity < 0:
            raise ValueError("capacities must be non-negative")
        self.arcs.append((tail, head, capacity))
        return len(self.arcs) - 1


def max_flow_min_cut(d: FlowDigraph, tol=0.0):
    """Edmonds-Karp.  Returns ``(value, source_side)``.

    Exact when capacities are ints or ``Fraction``; with floats, residual
    capacities at or below ``tol`` count as saturated.
    """
    n = d.n
    head, cap, adj = [], [], [[] for _ in range(n)]
    for t, h, c in d.arcs:
        adj[t].append(len(head))
        head.append(h)
        cap.append(c)
        adj[h].append(len(head))
        head.append(t)
        cap.append(0)
    s, t = d.source, d.sink
    value = 0
    while True:
        pred = [-1] * n
        pred[s] = -2
        queue = deque([s])
        while queue and pred[t] == -1:
            u = queue.popleft()
            for a in adj[u]:
                v = head[a]
                if pred[v] == -1 and cap[a] > tol:
                    pred[v] = a
                    queue.append(v)
        if pred[t] == -1:
            break
        bottleneck = INF
        v = t
        while v != s:
            a = pred[v]
            if cap[a] < bottleneck:
                bottleneck = cap[a]
            v = head[a ^ 1]
        if bottleneck == INF:
            return INF, _reachable(adj, head, cap, s, tol)
        v = t
        while v != s:
            a = pred[v]
            if cap[a] != INF:
                cap[a] -= bottleneck
            if cap[a ^ 1] != INF:
                cap[a ^ 1] += bottleneck
            v = head[a ^ 1]
        value += bottleneck
    return value, _reachable(adj, head, cap, s, tol)


def _reachable(adj, head, cap, s, tol):
    seen = {s}
    stack = [s]
    while stack:
        u = stack.pop()
        for a in adj[u]:
            v = head[a]
            if v not in seen and cap[a] > tol:
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def cut_capacity(d: FlowDigraph, source_side):
    total = 0
    for t, h, c in d.arcs:
        if t in source_side and h not in source_side:
            if c == INF:
                return INF
            total += c
    return total


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def tree_graph(g: WeightedGraph, tree: Tree) -> tuple[WeightedGraph, list[int]]:
    """Relabel ``tree`` as a standalone graph; returns it and the new-to-old vertex map."""
    verts = list(tree.vertices)
    index = {v: i for i, v in enumerate(verts)}
    edges = [(index[g.edges[e][0]], index[g.edges[e][1]], g.edges[e][2]) for e in sorted(tree.edges)]
    return WeightedGraph(len(verts), tuple(edges)), verts


def spanning_trees(g: WeightedGraph, vertices: Sequence[int] | None = None):
    """Every spanning tree of ``g[vertices]`` as a Tree (brute force, tiny graphs only)."""
    from itertools import combinations

    inside = set(range(g.n)) if vertices is None else set(vertices)
    cand = [e for e in range(g.m) if g.edges[e][0] in inside and g.edges[e][1] in inside]
    need = len(inside) - 1
    for combo in combinations(cand, need):
        uf = UnionFind(g.n)
        if all(uf.union(g.edges[e][0], g.edges[e][1]) for e in combo):
            yield Tree.from_edges(g, inside, combo)
