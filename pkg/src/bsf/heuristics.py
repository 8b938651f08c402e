"""Primal side: k-approximation, exact min-max partition of a tree, the
forbidden-edge search heuristic, and column-pool seeding.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import random
import time
from dataclasses import dataclass, field

from .errors import DisconnectedGraph, NotATree
from .graph import SpanningKForest, Tree, WeightedGraph, forest_from_edges, induced_mst, is_connected, kruskal_mst

log = logging.getLogger(__name__)

STAGNATION_LIMIT = 1000


class ColumnPool:
    """Insertion-ordered set of trees, deduplicated on (vertex set, edge set)."""

    def __init__(self, trees=()):
        self._trees = {}
        for t in trees:
            self.add(t)

    def add(self, tree: Tree, ub=math.inf) -> bool:
        if tree.weight > ub or tree.key in self._trees:
            return False
        self._trees[tree.key] = tree
        return True

    def extend(self, trees, ub=math.inf) -> int:
        return sum(self.add(t, ub) for t in trees)

    def __contains__(self, tree):
        return tree.key in self._trees

    def __len__(self):
        return len(self._trees)

    def __iter__(self):
        return iter(self._trees.values())

    @property
    def trees(self) -> list[Tree]:
        return list(self._trees.values())


def k_approx(g: WeightedGraph, k: int) -> SpanningKForest:
    """MST minus its k-1 heaviest edges (equal weights: higher edge id goes first)."""
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    mst = kruskal_mst(g)
    ranked = sorted(mst.edges, key=lambda e: (g.edges[e][2], e), reverse=True)
    drop = set(ranked[: k - 1])
    return forest_from_edges(g, [e for e in mst.edges if e not in drop])


# ---------------------------------------------------------------------------
# min-max k-forest of a tree


def _greedy_cuts(g, children, order, parent_edge, limit):
    """Fewest edge cuts so every component weighs at most ``limit``.

    Bottom-up: a vertex keeps its children's loads (child load plus the edge
    weight) and sheds the largest ones until its own load fits.
    """
    load = {}
    cuts = []
    for v in reversed(order):
        contrib = []
        for c in children[v]:
            e = parent_edge[c]
            contrib.append((load[c] + g.edges[e][2], e))
        total = sum(x for x, _ in contrib)
        if total > limit:
            contrib.sort(reverse=True)
            for x, e in contrib:
                if total <= limit:
                    break
                total -= x
                cuts.append(e)
        load[v] = total
    return cuts


def _mskf_edges(g: WeightedGraph, tree_edges, k):
    """Edge ids to delete from the spanning tree ``tree_edges`` of g (exactly k-1)."""
    adj = {v: [] for v in range(g.n)}
    for e in tree_edges:
        u, v, _ = g.edges[e]
        adj[u].append((v, e))
        adj[v].append((u, e))
    root = 0
    order, children, parent_edge = [root], {v: [] for v in range(g.n)}, {}
    seen = {root}
    for v in order:
        for u, e in adj[v]:
            if u not in seen:
                seen.add(u)
                parent_edge[u] = e
                children[v].append(u)
                order.append(u)
    lo, hi = 0, g.total_weight(tree_edges)
    while lo < hi:
        mid = (lo + hi) // 2
        if len(_greedy_cuts(g, children, order, parent_edge, mid)) <= k - 1:
            hi = mid
        else:
            lo = mid + 1
    cuts = set(_greedy_cuts(g, children, order, parent_edge, lo))
    # spare cuts never hurt: weights are non-negative
    extra = sorted((e for e in tree_edges if e not in cuts), key=lambda e: (g.edges[e][2], e), reverse=True)
    cuts.update(extra[: k - 1 - len(cuts)])
    return cuts


def tree_mskf(t: WeightedGraph, k: int) -> SpanningKForest:
    """Optimal min-max k-forest of a tree, by binary search on the answer."""
    if t.m != t.n - 1 or not is_connected(t):
        raise NotATree("input graph is not a tree")
    if not 1 <= k <= t.n:
        raise ValueError("k must lie in [1, n]")
    cuts = _mskf_edges(t, range(t.m), k)
    return forest_from_edges(t, [e for e in range(t.m) if e not in cuts])


def mskf_of_spanning_tree(g: WeightedGraph, tree: Tree, k: int) -> SpanningKForest:
    cuts = _mskf_edges(g, tree.edges, k)
    return forest_from_edges(g, [e for e in tree.edges if e not in cuts])


# ---------------------------------------------------------------------------
# forbidden-edge search


@dataclass(order=True)
class HeuristicNode:
    lower_bound: int
    id: int
    forbidden: frozenset = field(compare=False)
    mst: Tree = field(compare=False)


@dataclass
class HeuristicResult:
    ub: int
    forest: SpanningKForest
    pool: ColumnPool
    nodes: int
    exhausted: bool


def _mst_avoiding(g, forbidden):
    order = sorted((e for e in range(g.m) if e not in forbidden), key=lambda e: (g.edges[e][2], e))
    from .graph import UnionFind

    uf = UnionFind(g.n)
    chosen = []
    for e in order:
        if uf.union(g.edges[e][0], g.edges[e][1]):
            chosen.append(e)
            if len(chosen) == g.n - 1:
                break
    if len(chosen) != g.n - 1:
        return None
    return Tree.from_edges(g, range(g.n), chosen)


def heuristic_bnb(g: WeightedGraph, k: int, time_limit=None, pool: ColumnPool | None = None,
                  node_limit=None) -> HeuristicResult:
    """Best-first search over forbidden edge sets; each node solves the tree problem on its MST.

    Every tree of every forest met along the way that weighs at most the
    incumbent value is recorded in ``pool``.  Stops when the queue empties,
    after ``node_limit`` expanded nodes, or after ``time_limit`` seconds.
    """
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    if not is_connected(g):
        raise DisconnectedGraph("heuristic requires a connected graph")
    pool = ColumnPool() if pool is None else pool
    start = time.perf_counter()
    ids = itertools.count()
    root_mst = kruskal_mst(g)
    queue = [HeuristicNode(-(-root_mst.weight // k), next(ids), frozenset(), root_mst)]
    seen = {root_mst.edges}
    ub, best = math.inf, None
    expanded = 0
    while queue:
        if time_limit is not None and time.perf_counter() - start > time_limit:
            break
        if node_limit is not None and expanded >= node_limit:
            break
        node = heapq.heappop(queue)
        if node.lower_bound >= ub:
            continue
        expanded += 1
        forest = mskf_of_spanning_tree(g, node.mst, k)
        value = forest.value_minmax
        if value < ub:
            ub, best = value, forest
        pool.extend(forest.trees, ub)
        # heavier edges first: removing them is likelier to change the MST
        for e in sorted(node.mst.edges, key=lambda e: (-g.edges[e][2], e)):
            forbidden = node.forbidden | {e}
            child = _mst_avoiding(g, forbidden)
            if child is None or child.edges in seen:
                continue
            lb = -(-child.weight // k)
            if lb < ub:
                seen.add(child.edges)
                heapq.heappush(queue, HeuristicNode(lb, next(ids), forbidden, child))
    exhausted = not any(n.lower_bound < ub for n in queue)
    log.debug("heuristic: ub=%s nodes=%d pool=%d exhausted=%s", ub, expanded, len(pool), exhausted)
    return HeuristicResult(ub, best, pool, expanded, exhausted)


# ---------------------------------------------------------------------------
# column seeding


def pool_target(n: int, k: int) -> int:
    return math.ceil(2 ** (0.1 * n + 12 - k / 2))


def seeding_time_limit(n: int) -> float:
    return 3 ** ((n - 20) / 10)


def seed_columns(g: WeightedGraph, k: int, ub, pool: ColumnPool, rng_seed=0,
                 target=None, stagnation=STAGNATION_LIMIT) -> ColumnPool:
    """Grow ``pool`` by random single-vertex removals/additions followed by an induced MST.

    Runs until the pool holds ``pool_target(n, k)`` trees or ``stagnation``
    consecutive attempts add nothing new.
    """
    target = pool_target(g.n, k) if target is None else target
    if len(pool) == 0:
        return pool
    rng = random.Random(rng_seed)
    trees = pool.trees
    failures = 0
    while len(pool) < target and failures < stagnation:
        base = trees[rng.randrange(len(trees))]
        members = set(base.vertices)
        candidate = None
        if rng.random() < 0.5:
            if len(members) > 1:
                v = base.vertices[rng.randrange(len(members))]
                candidate = induced_mst(g, members - {v})
        else:
            # only neighbours of the tree can keep the induced subgraph connected
            outside = sorted({u for v in members for u, _ in g.adjacency[v] if u not in members})
            if outside:
                candidate = induced_mst(g, members | {outside[rng.randrange(len(outside))]})
        if candidate is not None and pool.add(candidate, ub):
            trees.append(candidate)
            failures = 0
        else:
            failures += 1
    return pool
