"""Column pricing: reduced costs and the budgeted prize-collecting Steiner tree subproblem."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import GuardViolated
from .graph import FlowDigraph, Tree, WeightedGraph, max_flow_min_cut
from .lp import EQ, GE, LE, OPTIMAL, LinearProgram
from .mip import FEASIBLE, MipSpec, solve_mip

log = logging.getLogger(__name__)

RHO_TOL = 1e-6
CUT_TOL = 1e-6


@dataclass
class DualValues:
    theta: float
    eta: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        self.theta = float(self.theta)
        self.eta = np.asarray(self.eta, dtype=float)
        self.zeta = np.asarray(self.zeta, dtype=float)
        if self.theta < 0 or np.any(self.zeta < 0):
            raise ValueError("theta and zeta must be non-negative")

    @classmethod
    def from_rmp(cls, sol):
        return cls(max(0.0, sol.theta), sol.eta, np.maximum(0.0, sol.zeta))

    def support(self, tol=1e-9):
        """B: vertices with positive zeta."""
        return [v for v, z in enumerate(self.zeta) if z > tol]

    def alpha(self, vertices) -> float:
        return float(sum(self.zeta[v] for v in vertices))


def reduced_cost(t: Tree, d: DualValues) -> float:
    """rho(T) = -theta + sum of eta over V(T) - w(T) * sum of zeta over V(T)."""
    return -d.theta + float(sum(d.eta[v] for v in t.vertices)) - t.weight * d.alpha(t.vertices)


# -- the BPCST model --------------------------------------------------------


@dataclass
class BpcstInstance:
    """Digraph over V and a root r = n: arcs (tail, head, edge id or None) with profit c' and weight w'."""

    g: WeightedGraph
    root: int
    arcs: list
    profit: list
    weight: list
    budget: float


@dataclass
class BpcstSpec(MipSpec):
    instance: BpcstInstance | None = None
    x: list = field(default_factory=list)  # per arc
    y: list = field(default_factory=list)  # per vertex

    def decode(self, xvec) -> Tree:
        g = self.instance.g
        vertices = [v for v in range(g.n) if xvec[self.y[v]] > 0.5]
        edges = [e for a, (_, _, e) in enumerate(self.instance.arcs) if e is not None and xvec[self.x[a]] > 0.5]
        return Tree.from_edges(g, vertices, edges)

    def objective(self, xvec) -> float:
        return float(sum(self.instance.profit[a] * xvec[j] for a, j in enumerate(self.x)))


def _connectivity_cuts(spec: BpcstSpec, xvec):
    """Rows sum_{a into S} x_a >= y_v for each chosen v cut off from the root."""
    inst = spec.instance
    n, r = inst.g.n, inst.root
    rows, seen = [], set()
    for v in range(n):
        yv = xvec[spec.y[v]]
        if yv <= CUT_TOL:
            continue
        d = FlowDigraph(n + 1, r, v)
        for a, (t, h, _) in enumerate(inst.arcs):
            cap = max(0.0, float(xvec[spec.x[a]]))
            if cap > 0:
                d.add_arc(t, h, cap)
        value, source_side = max_flow_min_cut(d, tol=1e-9)
        if value >= yv - CUT_TOL:
            continue
        sink_side = frozenset(range(n + 1)) - source_side
        if (sink_side, v) in seen:
            continue
        seen.add((sink_side, v))
        row = {spec.x[a]: 1.0 for a, (t, h, _) in enumerate(inst.arcs) if h in sink_side and t not in sink_side}
        row[spec.y[v]] = row.get(spec.y[v], 0.0) - 1.0
        rows.append((row, GE, 0.0))
    return rows


def build_bpcst(g: WeightedGraph, prizes, costs, weights=None, budget=math.inf, forced_root_arc=None,
                theta=0.0) -> BpcstSpec:
    """Arborescence model: max sum c'(a) x_a over trees hanging off an artificial root.

    ``costs`` and ``weights`` are per edge of ``g``; ``forced_root_arc`` names
    the vertex that the root must enter.  Connectivity rows are added lazily on
    integral candidates.  The model also carries the side row sum c'x >= 0.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    n = g.n
    weights = [w for _, _, w in g.edges] if weights is None else list(weights)
    arcs, profit, wt = [], [], []
    for e, (u, v, _) in enumerate(g.edges):
        for t, h in ((u, v), (v, u)):
            arcs.append((t, h, e))
            profit.append(float(prizes[h]) - float(costs[e]))
            wt.append(float(weights[e]))
    for v in range(n):
        arcs.append((n, v, None))
        profit.append(float(prizes[v]) - float(theta))
        wt.append(0.0)
    inst = BpcstInstance(g, n, arcs, profit, wt, budget)

    lp = LinearProgram("max", name="bpcst")
    x = [lp.add_var(0, 1, obj=profit[a], name=f"x_{t}_{h}") for a, (t, h, _) in enumerate(arcs)]
    y = [lp.add_var(0, 1, name=f"y_{v}") for v in range(n)]
    if math.isfinite(budget):
        lp.add_row({x[a]: wt[a] for a in range(len(arcs)) if wt[a]}, LE, float(budget), name="budget")
    root_arcs = [a for a, (t, _, _) in enumerate(arcs) if t == n]
    lp.add_row({x[a]: 1.0 for a in root_arcs}, EQ, 1.0, name="root")
    for v in range(n):
        row = {x[a]: 1.0 for a, (_, h, _) in enumerate(arcs) if h == v}
        row[y[v]] = -1.0
        lp.add_row(row, EQ, 0.0, name=f"indeg_{v}")
    lp.add_row({x[a]: profit[a] for a in range(len(arcs)) if profit[a]}, GE, 0.0, name="guard")
    if forced_root_arc is not None:
        a = root_arcs[forced_root_arc]
        lp.lo[x[a]] = 1.0
    spec = BpcstSpec(lp, set(x) | set(y), instance=inst, x=x, y=y)
    spec.lazy = lambda xvec: _connectivity_cuts(spec, xvec)
    return spec


def inject_branch_rules(spec: BpcstSpec, rules):
    """together: y_u = y_v; apart: y_u + y_v <= 1."""
    for r in rules:
        yu, yv = spec.y[r.u], spec.y[r.v]
        if r.kind == "together":
            spec.lp.add_row({yu: 1.0, yv: -1.0}, EQ, 0.0, name=f"together_{r.u}_{r.v}")
        else:
            spec.lp.add_row({yu: 1.0, yv: 1.0}, LE, 1.0, name=f"apart_{r.u}_{r.v}")
    return spec


def solve_bpcst(spec: BpcstSpec, time_limit=None):
    """Optimal tree (or None) plus every distinct tree seen as an incumbent."""
    res = solve_mip(spec, time_limit=time_limit, relative_gap_tol=0.0)
    trees = {}
    for xv in res.incumbents:
        t = spec.decode(xv)
        trees.setdefault(t.key, t)
    best = spec.decode(res.x) if res.status in (OPTIMAL, FEASIBLE) else None
    return best, list(trees.values()), res


# -- the two reductions ------------------------------------------------------


def _collect(found, trees, d, budget, rules):
    for t in trees:
        if t.weight > budget or t.key in found:
            continue
        if not _respects(t, rules):
            continue
        if reduced_cost(t, d) > RHO_TOL:
            found[t.key] = t


def _respects(tree, rules):
    for r in rules:
        a, b = r.u in tree, r.v in tree
        if (r.kind == "together" and a != b) or (r.kind == "apart" and a and b):
            return False
    return True


def big_m(d: DualValues, ub) -> float:
    return 1.0 + float(np.abs(d.eta).sum()) + ub * float(d.zeta.sum())


def _subsets(items):
    for mask in range(1 << len(items)):
        yield [items[i] for i in range(len(items)) if mask >> i & 1]


def fixed_vertices_spec(g: WeightedGraph, d: DualValues, ub, subset, presolve=True) -> BpcstSpec:
    """BPCST for one S within B: M on the prizes of S and on edges touching B minus S, budget UB-1."""
    support = d.support()
    inside = set(subset)
    outside = set(support) - inside
    M = big_m(d, ub)
    alpha = d.alpha(inside)
    prizes = [d.eta[v] + (M if v in inside else 0.0) for v in range(g.n)]
    costs = [w * alpha + (M if (u in outside or v in outside) else 0.0) for u, v, w in g.edges]
    spec = build_bpcst(g, prizes, costs, budget=ub - 1, forced_root_arc=min(inside) if inside else None,
                       theta=d.theta)
    if presolve:
        # M alone cannot exclude an outside singleton when S is empty, so the bounds are needed
        for v in inside:
            spec.lp.lo[spec.y[v]] = 1.0
        for v in outside:
            spec.lp.hi[spec.y[v]] = 0.0
    return spec


def price_fixed_vertices(g: WeightedGraph, d: DualValues, ub, rules=(), time_limit=None) -> list[Tree]:
    """One BPCST per S within B, forcing S in and B minus S out through M-shifted prizes and costs."""
    support = d.support()
    if 2 ** len(support) >= 2 * ub:
        raise GuardViolated(f"2^{len(support)} >= 2*UB = {2 * ub}")
    start = time.perf_counter()
    found = {}
    for S in _subsets(support):
        if time_limit is not None and time.perf_counter() - start > time_limit:
            break
        spec = inject_branch_rules(fixed_vertices_spec(g, d, ub, S), rules)
        remaining = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))
        best, seen, _ = solve_bpcst(spec, remaining)
        _collect(found, ([best] if best else []) + seen, d, ub - 1, rules)
    return list(found.values())


def gamma(d: DualValues, W) -> float:
    return min(float(np.min(d.eta - W * d.zeta)), 0.0)


def fixed_weight_prizes(d: DualValues, W):
    """(p_W, c_W) with gamma folded in so that every prize is non-negative."""
    gam = gamma(d, W)
    return d.eta - W * d.zeta - gam, -gam


def price_fixed_weight(g: WeightedGraph, d: DualValues, ub, rules=(), time_limit=None, stop_early=True,
                       jump=True) -> list[Tree]:
    """Sweep W from UB-1 down to 1 solving the budget-W BPCST with prizes eta - W zeta (shifted).

    After a success W drops to w(T)-1 when ``jump`` is set, else by one.  Only
    the unit-step sweep is guaranteed to meet the maximum-rho tree: at W = w(T*)
    the budget-W optimum has rho at least rho(T*).
    """
    if ub < 1:
        raise ValueError("UB must be at least 1")
    start = time.perf_counter()
    found = {}
    W = ub - 1
    while W >= 1:
        if time_limit is not None and time.perf_counter() - start > time_limit:
            break
        prizes, cost = fixed_weight_prizes(d, W)
        spec = build_bpcst(g, prizes, [cost] * g.m, budget=W, theta=d.theta)
        inject_branch_rules(spec, rules)
        remaining = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))
        best, seen, _ = solve_bpcst(spec, remaining)
        before = len(found)
        _collect(found, seen, d, ub - 1, rules)
        if best is not None and reduced_cost(best, d) > RHO_TOL:
            found.setdefault(best.key, best)
            W = best.weight - 1 if jump else W - 1
        else:
            W -= 1
        if stop_early and len(found) > before:
            break
    # with UB <= 1 the sweep is empty and only single vertices fit the budget
    if ub - 1 < 1:
        _collect(found, [Tree.singleton(v) for v in range(g.n)], d, ub - 1, rules)
    return list(found.values())


def price(g: WeightedGraph, d: DualValues, ub, rules=(), time_limit=None):
    """Dispatch on the size of B; returns (trees, strategy name)."""
    if 2 ** len(d.support()) < 2 * ub:
        return price_fixed_vertices(g, d, ub, rules, time_limit), "fixed-vertices"
    return price_fixed_weight(g, d, ub, rules, time_limit), "fixed-weight"
