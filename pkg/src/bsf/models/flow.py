"""Arborescence/flow formulations for min-max and max-min spanning k-forests."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import BadBound, InconsistentSolution
from ..graph import SpanningKForest, WeightedGraph, forest_from_edges, kruskal_mst, max_spanning_tree
from ..lp import EQ, GE, LE, LinearProgram
from ..mip import MipSpec

INTERPRET_TOL = 1e-3


@dataclass
class FlowModel:
    spec: MipSpec
    g: WeightedGraph
    k: int
    U: float
    arcs: list  # (tail, head, edge id); arc 2e is u->v, 2e+1 is v->u
    y: list
    g_var: list
    z: list
    f: list
    omega: int
    theta: dict = field(default_factory=dict)
    assign: dict = field(default_factory=dict)

    @property
    def lp(self):
        return self.spec.lp


def _arcs(g):
    arcs = []
    for e, (u, v, _) in enumerate(g.edges):
        arcs.append((u, v, e))
        arcs.append((v, u, e))
    return arcs


def _base(g: WeightedGraph, k: int, U, sense):
    lp = LinearProgram(sense, name="flow")
    arcs = _arcs(g)
    y = [lp.add_var(0, 1, name=f"y_{v}") for v in range(g.n)]
    gv = [lp.add_var(0, U, name=f"g_{v}") for v in range(g.n)]
    z = [lp.add_var(0, 1, name=f"z_{t}_{h}") for t, h, _ in arcs]
    f = [lp.add_var(0, U, name=f"f_{t}_{h}") for t, h, _ in arcs]
    omega = lp.add_var(0, math.inf, obj=1.0, name="omega")
    into = [[] for _ in range(g.n)]
    out = [[] for _ in range(g.n)]
    for a, (t, h, _) in enumerate(arcs):
        out[t].append(a)
        into[h].append(a)

    lp.add_row({v: 1.0 for v in y}, EQ, k, name="roots")
    for v in range(g.n):
        row = {z[a]: 1.0 for a in into[v]}
        row[y[v]] = 1.0
        lp.add_row(row, EQ, 1, name=f"indeg_{v}")
    for v in range(g.n):
        row = {gv[v]: 1.0}
        for a in into[v]:
            row[f[a]] = row.get(f[a], 0.0) + 1.0
            row[z[a]] = -float(g.edges[arcs[a][2]][2])
        for a in out[v]:
            row[f[a]] = row.get(f[a], 0.0) - 1.0
        lp.add_row(row, EQ, 0, name=f"flow_{v}")
    for a, (t, h, e) in enumerate(arcs):
        lp.add_row({f[a]: 1.0, z[a]: -float(g.edges[e][2])}, GE, 0, name=f"flo_{t}_{h}")
        lp.add_row({f[a]: 1.0, z[a]: -float(U)}, LE, 0, name=f"fhi_{t}_{h}")
    for v in range(g.n):
        lp.add_row({gv[v]: 1.0, y[v]: -float(U)}, LE, 0, name=f"groot_{v}")
    for e in range(g.m):
        lp.add_row({z[2 * e]: 1.0, z[2 * e + 1]: 1.0}, LE, 1, name=f"zpair_{e}")
    # a root may only send arcs towards higher ids
    for a, (t, h, _) in enumerate(arcs):
        if h < t:
            lp.add_row({y[t]: 1.0, z[a]: 1.0}, LE, 1, name=f"sym_{t}_{h}")
    model = FlowModel(None, g, k, U, arcs, y, gv, z, f, omega)
    return lp, model


def forest_lower_bound(g: WeightedGraph, k: int) -> int:
    """ceil(w(F)/k) for a minimum-weight forest F with n-k edges: the k trees share at least w(F)."""
    mst = kruskal_mst(g)
    heavy = sorted((g.edges[e][2] for e in mst.edges), reverse=True)[: k - 1]
    return -(-(mst.weight - sum(heavy)) // k)


def build_flow_minmax(g: WeightedGraph, k: int, U) -> FlowModel:
    """min omega over arborescence/flow encodings of spanning k-forests with tree weight <= U."""
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    lb = forest_lower_bound(g, k)
    if U < lb:
        raise BadBound(f"U={U} is below the trivial lower bound {lb}")
    lp, model = _base(g, k, U, "min")
    for v in range(g.n):
        lp.add_row({model.omega: 1.0, model.g_var[v]: -1.0}, GE, 0, name=f"omega_{v}")
    row = {model.omega: float(k)}
    row.update({gv: -1.0 for gv in model.g_var})
    lp.add_row(row, GE, 0, name="omega_avg")
    # every feasible point has omega >= its heaviest (integer) tree weight
    model.spec = MipSpec(lp, set(model.y) | set(model.z), integral_objective=True)
    return model


def build_flow_maxmin(g: WeightedGraph, k: int, U=None, mode="bigM") -> FlowModel:
    """max omega with either big-M rows or the per-class theta disaggregation.

    ``U`` must bound every tree weight; the default is the maximum spanning
    tree weight.  Mode ``theta`` adds binaries assigning each root to one
    class, without which the disaggregation only bounds the average tree
    weight.  Mode ``theta-literal`` omits them and is kept for comparison.
    """
    if mode not in ("bigM", "theta", "theta-literal"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")
    heaviest = max_spanning_tree(g).weight
    U = heaviest if U is None else U
    if U < heaviest // k:
        raise BadBound(f"U={U} is below the max-min upper bound {heaviest // k}")
    lp, model = _base(g, k, U, "max")
    lp.hi[model.omega] = float(U)
    ints = set(model.y) | set(model.z)
    if mode == "bigM":
        for v in range(g.n):
            lp.add_row({model.omega: 1.0, model.g_var[v]: -1.0, model.y[v]: float(U)}, LE, U, name=f"omega_{v}")
    else:
        theta = {(v, i): lp.add_var(0, U, name=f"theta_{v}_{i}") for v in range(g.n) for i in range(k)}
        model.theta = theta
        for i in range(k):
            row = {model.omega: 1.0}
            row.update({theta[v, i]: -1.0 for v in range(g.n)})
            lp.add_row(row, LE, 0, name=f"omega_{i}")
        for v in range(g.n):
            row = {model.g_var[v]: 1.0}
            row.update({theta[v, i]: -1.0 for i in range(k)})
            lp.add_row(row, EQ, 0, name=f"gsplit_{v}")
        if mode == "theta":
            assign = {(v, i): lp.add_var(0, 1, name=f"a_{v}_{i}") for v in range(g.n) for i in range(k)}
            model.assign = assign
            ints |= set(assign.values())
            for v in range(g.n):
                row = {assign[v, i]: 1.0 for i in range(k)}
                row[model.y[v]] = -1.0
                lp.add_row(row, EQ, 0, name=f"assign_{v}")
            for i in range(k):
                lp.add_row({assign[v, i]: 1.0 for v in range(g.n)}, EQ, 1, name=f"class_{i}")
            for (v, i), a in assign.items():
                lp.add_row({theta[v, i]: 1.0, a: -float(U)}, LE, 0, name=f"thetaon_{v}_{i}")
            # each class holds one root; ordering classes by root id removes the k! relabelings
            for i in range(k - 1):
                row = {assign[v, i]: float(v) for v in range(g.n)}
                row.update({assign[v, i + 1]: -float(v) for v in range(g.n)})
                lp.add_row(row, LE, -1, name=f"classorder_{i}")
    model.spec = MipSpec(lp, ints, integral_objective=(mode != "theta-literal"))
    return model


def extract_forest_from_flow(model: FlowModel, x) -> SpanningKForest:
    x = np.asarray(x, dtype=float)
    chosen = []
    for a, (_, _, e) in enumerate(model.arcs):
        val = x[model.z[a]]
        if INTERPRET_TOL < val < 1 - INTERPRET_TOL:
            raise InconsistentSolution(f"arc variable {model.lp.var_names[model.z[a]]} = {val:.4g} is fractional")
        if val >= 1 - INTERPRET_TOL:
            chosen.append(e)
    roots = [v for v in range(model.g.n) if x[model.y[v]] >= 1 - INTERPRET_TOL]
    if len(set(chosen)) != len(chosen):
        raise InconsistentSolution("both orientations of an edge are used")
    forest = forest_from_edges(model.g, chosen)
    if forest.k != model.k or len(roots) != model.k:
        raise InconsistentSolution(f"expected {model.k} trees, decoded {forest.k} with {len(roots)} roots")
    for t in forest.trees:
        if sum(1 for r in roots if r in t) != 1:
            raise InconsistentSolution("a decoded tree does not hold exactly one root")
    forest.validate(model.g, model.k)
    return forest


def flow_vector(model: FlowModel, forest: SpanningKForest) -> np.ndarray:
    """Encode a forest as a feasible point of the model (root = smallest vertex of each tree)."""
    g = model.g
    x = np.zeros(model.lp.n_vars)
    arc_of = {(t, h): a for a, (t, h, _) in enumerate(model.arcs)}
    weights = []
    for tree in forest.trees:
        root = tree.vertices[0]
        adj = {v: [] for v in tree.vertices}
        for e in tree.edges:
            u, v, _ = g.edges[e]
            adj[u].append((v, e))
            adj[v].append((u, e))
        order, parent = [root], {root: None}
        for v in order:
            for u, e in adj[v]:
                if u not in parent:
                    parent[u] = (v, e)
                    order.append(u)
        below = {v: 0 for v in tree.vertices}
        for v in reversed(order[1:]):
            p, e = parent[v]
            a = arc_of[p, v]
            flow = below[v] + g.edges[e][2]
            x[model.z[a]] = 1.0
            x[model.f[a]] = flow
            below[p] += flow
        x[model.y[root]] = 1.0
        x[model.g_var[root]] = below[root]
        weights.append((below[root], root))
    if model.lp.sense == "min":
        x[model.omega] = max(w for w, _ in weights)
    else:
        x[model.omega] = min(w for w, _ in weights)
        for i, (w, root) in enumerate(sorted(weights, key=lambda p: p[1])):
            if model.theta:
                x[model.theta[root, i]] = w
            if model.assign:
                x[model.assign[root, i]] = 1.0
    return x
