"""Exhaustive solvers for tiny instances, used as ground truth in tests.

Dominance is used throughout: on a fixed vertex set a minimum spanning tree
is never worse for the min-max objective than any other spanning tree, and
with non-negative ``zeta`` it is never worse for the pricing score either.
So every enumeration ranges over connected vertex sets and takes the induced
MST (maximum spanning tree for max-min) of each.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .errors import DisconnectedGraph, TooLarge
from .graph import SpanningKForest, Tree, UnionFind, WeightedGraph, forest_from_edges, is_connected

PARTITION_LIMIT = 14
SUBSET_LIMIT = 10


def _bits(mask):
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


class _SubsetTable:
    """Induced (min or max) spanning tree weight and edges for every connected vertex mask."""

    def __init__(self, g: WeightedGraph, maximize=False):
        self.g = g
        sign = -1 if maximize else 1
        order = sorted(range(g.m), key=lambda e: (sign * g.edges[e][2], e))
        self.order = [(e, 1 << g.edges[e][0], 1 << g.edges[e][1], g.edges[e][2]) for e in order]
        self._cache = {}

    def get(self, mask):
        """``(weight, edge ids)`` of the induced tree, or ``None`` if g[mask] is disconnected."""
        hit = self._cache.get(mask, False)
        if hit is not False:
            return hit
        verts = _bits(mask)
        if len(verts) == 1:
            res = (0, ())
        else:
            uf = UnionFind(self.g.n)
            chosen = []
            weight = 0
            need = len(verts) - 1
            for e, bu, bv, w in self.order:
                if mask & bu and mask & bv:
                    u, v = self.g.edges[e][0], self.g.edges[e][1]
                    if uf.union(u, v):
                        chosen.append(e)
                        weight += w
                        if len(chosen) == need:
                            break
            res = (weight, tuple(chosen)) if len(chosen) == need else None
        self._cache[mask] = res
        return res

    def tree(self, mask):
        weight, edges = self.get(mask)
        return Tree(tuple(_bits(mask)), frozenset(edges), weight)


def _check(g, k, limit):
    if g.n > limit:
        raise TooLarge(f"n={g.n} exceeds the exhaustive limit {limit}")
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    if not is_connected(g):
        raise DisconnectedGraph("oracle requires a connected graph")


def _partition_search(g, k, maximize):
    """Optimal partition into k connected blocks via memoised block enumeration."""
    table = _SubsetTable(g, maximize)
    full = (1 << g.n) - 1
    worse = -math.inf if maximize else math.inf

    def better(a, b):
        return a > b if maximize else a < b

    @lru_cache(maxsize=None)
    def solve(mask, parts):
        # best objective over partitions of mask into `parts` connected blocks,
        # plus the first block of an optimal partition
        if parts == 1:
            hit = table.get(mask)
            return (worse, 0) if hit is None else (hit[0], mask)
        low = mask & -mask
        rest = mask ^ low
        best, best_block = worse, 0
        # enumerate subsets of `rest`, each joined with the lowest vertex, in increasing order
        sub = 0
        while True:
            block = sub | low
            remaining = mask ^ block
            if remaining and bin(remaining).count("1") >= parts - 1:
                hit = table.get(block)
                # a block no better than the incumbent cannot improve the max (min)
                if hit is not None and better(hit[0], best):
                    sub_val, _ = solve(remaining, parts - 1)
                    if sub_val != worse:
                        val = min(hit[0], sub_val) if maximize else max(hit[0], sub_val)
                        if better(val, best):
                            best, best_block = val, block
            if sub == rest:
                break
            sub = (sub - rest) & rest
        return best, best_block

    value, _ = solve(full, k)
    if value == worse:
        raise DisconnectedGraph("no partition into connected blocks")
    trees = []
    mask, parts = full, k
    while parts:
        _, block = solve(mask, parts)
        trees.append(table.tree(block))
        mask ^= block
        parts -= 1
    return value, SpanningKForest(trees)


def _forest_search(g, k):
    """Depth-first include/exclude over edges in ascending weight with monotone pruning."""
    order = sorted(range(g.m), key=lambda e: (g.edges[e][2], e))
    weights = [g.edges[e][2] for e in order]
    prefix = [0]
    for w in weights:
        prefix.append(prefix[-1] + w)
    target = g.n - k
    best = [math.inf, None]
    parent = list(range(g.n))
    cweight = [0] * g.n
    chosen = []

    def find(u):
        while parent[u] != u:
            u = parent[u]
        return u

    def dfs(i, total, heaviest):
        need = target - len(chosen)
        if need == 0:
            if heaviest < best[0]:
                best[0], best[1] = heaviest, list(chosen)
            return
        if g.m - i < need:
            return
        # the k trees share the chosen weight plus at least the `need` cheapest remaining edges
        if -(-(total + prefix[i + need] - prefix[i]) // k) >= best[0]:
            return
        e = order[i]
        u, v, w = g.edges[e]
        ru, rv = find(u), find(v)
        if ru != rv:
            merged = cweight[ru] + cweight[rv] + w
            if merged < best[0]:
                parent[rv] = ru
                saved = cweight[ru]
                cweight[ru] = merged
                chosen.append(e)
                dfs(i + 1, total + w, max(heaviest, merged))
                chosen.pop()
                cweight[ru] = saved
                parent[rv] = rv
        dfs(i + 1, total, heaviest)

    dfs(0, 0, 0)
    forest = forest_from_edges(g, best[1])
    return forest.value_minmax, forest


def exact_minmax(g: WeightedGraph, k: int, max_n: int = PARTITION_LIMIT) -> tuple[int, SpanningKForest]:
    """Exact min-max spanning k-forest.

    Graphs with at most 14 vertices are solved by connected-partition
    enumeration; larger ones (only when ``max_n`` allows) by a pruned
    edge-subset search that is practical on sparse graphs.
    """
    _check(g, k, max_n)
    if g.n <= PARTITION_LIMIT:
        return _partition_search(g, k, maximize=False)
    return _forest_search(g, k)


def exact_maxmin(g: WeightedGraph, k: int, max_n: int = PARTITION_LIMIT) -> tuple[int, SpanningKForest]:
    _check(g, k, min(max_n, PARTITION_LIMIT))
    return _partition_search(g, k, maximize=True)


def connected_masks(g: WeightedGraph):
    table = _SubsetTable(g)
    for mask in range(1, 1 << g.n):
        if table.get(mask) is not None:
            yield mask, table


def enumerate_dominant_trees(g: WeightedGraph, budget=math.inf, max_n: int = SUBSET_LIMIT) -> list[Tree]:
    """Induced MST of every connected vertex set, keeping those with weight <= budget."""
    if g.n > max_n:
        raise TooLarge(f"n={g.n} exceeds the subset-enumeration limit {max_n}")
    trees = [table.tree(mask) for mask, table in connected_masks(g) if table.get(mask)[0] <= budget]
    trees.sort(key=lambda t: (len(t.vertices), t.vertices))
    return trees


def oracle_reduced_cost(tree: Tree, duals) -> float:
    eta, zeta = duals.eta, duals.zeta
    return -duals.theta + sum(eta[v] for v in tree.vertices) - tree.weight * sum(zeta[v] for v in tree.vertices)


def pricing_oracle(g: WeightedGraph, duals, budget=math.inf, max_n: int = SUBSET_LIMIT):
    """Best reduced cost over all trees of weight <= budget; ties go to smaller, then lexicographically smaller, vertex sets."""
    best, best_tree = -math.inf, None
    for tree in enumerate_dominant_trees(g, budget, max_n):
        rho = oracle_reduced_cost(tree, duals)
        # trees arrive ordered by (size, vertices), so strict improvement keeps the tie-break
        if rho > best + 1e-12:
            best, best_tree = rho, tree
    return best, best_tree


def forest_value_bruteforce(g: WeightedGraph, k: int, maximize=False):
    """Slow reference: every (n-k)-edge acyclic subset, evaluated directly."""
    from itertools import combinations

    best = None
    for combo in combinations(range(g.m), g.n - k):
        uf = UnionFind(g.n)
        if not all(uf.union(g.edges[e][0], g.edges[e][1]) for e in combo):
            continue
        forest = forest_from_edges(g, combo)
        val = forest.value_maxmin if maximize else forest.value_minmax
        if best is None or (val > best if maximize else val < best):
            best = val
    return best
