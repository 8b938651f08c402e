"""Edge-assignment formulation with cycle-elimination rows added by min-cut separation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import InconsistentSolution
from ..graph import INF, FlowDigraph, SpanningKForest, WeightedGraph, forest_from_edges, max_flow_min_cut
from ..lp import EQ, GE, LE, LinearProgram
from ..mip import MipSpec

MAX_CUTS_PER_ROUND = 50


@dataclass
class CycleModel:
    spec: MipSpec
    g: WeightedGraph
    k: int
    x: list  # x[e][i]
    omega: int

    @property
    def lp(self):
        return self.spec.lp

    def edge_totals(self, xvec):
        """Per-edge sum over classes, as a list."""
        return [max(0.0, float(sum(xvec[self.x[e][i]] for i in range(self.k)))) for e in range(self.g.m)]

    def cut_row(self, subset):
        s = set(subset)
        coefs = {}
        for e, (u, v, _) in enumerate(self.g.edges):
            if u in s and v in s:
                for i in range(self.k):
                    coefs[self.x[e][i]] = 1.0
        return coefs, LE, float(len(s) - 1)


def build_cycle_minmax(g: WeightedGraph, k: int) -> CycleModel:
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    lp = LinearProgram("min", name="cycle")
    x = [[lp.add_var(0, 1, name=f"x_{e}_{i}") for i in range(k)] for e in range(g.m)]
    omega = lp.add_var(0, math.inf, obj=1.0, name="omega")
    for i in range(k):
        row = {omega: 1.0}
        row.update({x[e][i]: -float(g.edges[e][2]) for e in range(g.m)})
        lp.add_row(row, GE, 0, name=f"weight_{i}")
    for e in range(g.m):
        lp.add_row({x[e][i]: 1.0 for i in range(k)}, LE, 1, name=f"once_{e}")
    incident = [[] for _ in range(g.n)]
    for e, (u, v, _) in enumerate(g.edges):
        incident[u].append(e)
        incident[v].append(e)
    if k > 1:
        for v in range(g.n):
            for e in incident[v]:
                for f in incident[v]:
                    if f == e:
                        continue
                    for i in range(k):
                        row = {x[e][i]: 1.0}
                        row.update({x[f][j]: 1.0 for j in range(k) if j != i})
                        lp.add_row(row, LE, 1, name=f"disj_{v}_{e}_{f}_{i}")
    lp.add_row({x[e][i]: 1.0 for e in range(g.m) for i in range(k)}, EQ, g.n - k, name="edges")
    model = CycleModel(None, g, k, x, omega)

    def lazy(xvec):
        sets = separate_cycle(model.edge_totals(xvec), g, k, tol=1e-7)
        return [model.cut_row(s) for s in sets[:MAX_CUTS_PER_ROUND]]

    model.spec = MipSpec(lp, {v for row in x for v in row}, lazy=lazy, integral_objective=True)
    return model


def separation_digraph(totals, g: WeightedGraph, pinned=None) -> FlowDigraph:
    """D over V + {s, t}: s = n, t = n + 1.  ``totals[e]`` is the class sum of x-bar on edge e."""
    half = [t / 2 for t in totals]
    d = FlowDigraph(g.n + 2, g.n, g.n + 1)
    for e, (u, v, _) in enumerate(g.edges):
        d.add_arc(u, v, half[e])
        d.add_arc(v, u, half[e])
    for u in range(g.n):
        cap = sum(half[e] for e, (a, b, _) in enumerate(g.edges) if u in (a, b))
        d.add_arc(g.n, u, INF if u == pinned else cap)
    for u in range(g.n):
        d.add_arc(u, g.n + 1, 1)
    return d


def separate_cycle(xbar, g: WeightedGraph, k: int, tol=0.0) -> list[tuple[int, ...]]:
    """Vertex sets S whose cycle-elimination row is violated by ``xbar``.

    ``xbar`` is either the per-edge class sums (length m) or an (m, k) array.
    The cut of S + {s} has capacity |S| + (total - x(E(S))), so S is violated
    exactly when that capacity is below total + 1; with the edge-count row
    satisfied, total = n - k.  Exact with Fraction input and ``tol=0``.
    """
    arr = list(xbar)
    if arr and not np.isscalar(arr[0]) and not isinstance(arr[0], Fraction):
        arr = [sum(row) for row in arr]
    if len(arr) != g.m:
        raise ValueError("xbar must have one entry (or row) per edge")
    total = sum(arr)
    # subtracting a float zero would round Fraction input
    threshold = total + 1 - tol if tol else total + 1
    found = []
    seen = set()
    for v in range(g.n):
        d = separation_digraph(arr, g, pinned=v)
        value, side = max_flow_min_cut(d, tol=tol / 10 if tol else 0)
        if value == INF:
            continue
        if value < threshold:
            s = tuple(sorted(u for u in side if u < g.n))
            if s not in seen:
                seen.add(s)
                found.append(s)
    return found


def violated_by_scan(xbar, g: WeightedGraph, tol=0.0):
    """Reference: every non-empty S with x(E(S)) > |S| - 1, by subset enumeration."""
    arr = list(xbar)
    out = []
    for mask in range(1, 1 << g.n):
        inside = sum(arr[e] for e, (u, v, _) in enumerate(g.edges) if mask >> u & 1 and mask >> v & 1)
        if inside > bin(mask).count("1") - 1 + tol:
            out.append(tuple(u for u in range(g.n) if mask >> u & 1))
    return out


def cycle_vector(model: CycleModel, forest: SpanningKForest) -> np.ndarray:
    x = np.zeros(model.lp.n_vars)
    for i, tree in enumerate(forest.trees):
        for e in tree.edges:
            x[model.x[e][i]] = 1.0
    x[model.omega] = forest.value_minmax
    return x


def extract_forest_from_cycle(model: CycleModel, x, tol=1e-3) -> SpanningKForest:
    totals = model.edge_totals(x)
    bad = [e for e, t in enumerate(totals) if tol < t < 1 - tol]
    if bad:
        raise InconsistentSolution(f"edge {bad[0]} is fractionally selected ({totals[bad[0]]:.4g})")
    forest = forest_from_edges(model.g, [e for e, t in enumerate(totals) if t >= 1 - tol])
    if forest.k != model.k:
        raise InconsistentSolution(f"expected {model.k} trees, decoded {forest.k}")
    return forest
