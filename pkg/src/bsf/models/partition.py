"""Restricted master problem over tree columns."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import SpanningKForest, Tree, WeightedGraph, forest_from_edges
from ..lp import EQ, GE, OPTIMAL, LinearProgram, Simplex
from ..mip import MipResult, MipSpec, solve_mip

INTEGRAL_UB_TIME = 5.0


def respects(tree: Tree, rules) -> bool:
    for r in rules:
        a, b = r.u in tree, r.v in tree
        if r.kind == "together" and a != b:
            return False
        if r.kind == "apart" and a and b:
            return False
    return True


@dataclass
class RmpModel:
    """Partition LP over registered trees plus one artificial column per vertex.

    Rows: 0 is the tree-count row (-sum x >= -k), 1..n cover each vertex,
    n+1..2n tie omega to the weight of the tree covering each vertex.
    Artificial columns cover a single vertex at objective cost ``penalty``.
    """

    g: WeightedGraph
    k: int
    rules: tuple
    penalty: float
    lp: LinearProgram
    omega: int
    artificials: list
    columns: list = field(default_factory=list)  # Trees, in variable order after the artificials
    col_vars: list = field(default_factory=list)
    keys: set = field(default_factory=set)
    solver: Simplex | None = None

    def cover_row(self, v):
        return 1 + v

    def weight_row(self, v):
        return 1 + self.g.n + v

    def _coefs(self, tree):
        coefs = {0: -1.0}
        for v in tree.vertices:
            coefs[self.cover_row(v)] = 1.0
            coefs[self.weight_row(v)] = -float(tree.weight)
        return coefs

    def add_trees(self, trees) -> int:
        """Register rule-consistent unseen trees; returns how many were added."""
        fresh = []
        for t in trees:
            if t.key in self.keys or not respects(t, self.rules):
                continue
            self.keys.add(t.key)
            fresh.append(t)
        if not fresh:
            return 0
        if self.solver is None:
            for t in fresh:
                j = self.lp.add_var(0, math.inf, 0.0, name=f"xT_{len(self.columns)}")
                for i, a in self._coefs(t).items():
                    self.lp.rows[i][0][j] = a
                self.columns.append(t)
                self.col_vars.append(j)
        else:
            ids = self.solver.add_columns([(0.0, math.inf, 0.0, self._coefs(t)) for t in fresh])
            for t, j in zip(fresh, ids):
                self.lp.add_var(0, math.inf, 0.0, name=f"xT_{len(self.columns)}")
                for i, a in self._coefs(t).items():
                    self.lp.rows[i][0][j] = a
                self.columns.append(t)
                self.col_vars.append(j)
        return len(fresh)

    def solve(self):
        """Solve the LP relaxation (warm when possible); returns an RmpSolution."""
        if self.solver is None:
            self.solver = Simplex(self.lp)
        status = self.solver.solve()
        sol = self.solver.solution(status)
        if status != OPTIMAL:
            raise RuntimeError(f"restricted master LP returned {status}")
        n = self.g.n
        duals = sol.duals
        return RmpSolution(
            omega=float(sol.objective) if not self.artificial_used(sol.x) else math.inf,
            objective=float(sol.objective),
            x=np.array([sol.x[j] for j in self.col_vars]),
            theta=max(0.0, float(duals[0])),
            eta=np.array(duals[1 : 1 + n], dtype=float),
            zeta=np.maximum(0.0, np.array(duals[1 + n : 1 + 2 * n], dtype=float)),
            artificial=self.artificial_used(sol.x),
        )

    def artificial_used(self, x, tol=1e-9):
        return any(x[j] > tol for j in self.artificials)


@dataclass
class RmpSolution:
    omega: float
    objective: float
    x: np.ndarray
    theta: float
    eta: np.ndarray
    zeta: np.ndarray
    artificial: bool

    def support(self, tol=1e-9):
        return [i for i, v in enumerate(self.x) if v > tol]


def build_rmp(g: WeightedGraph, pool, k: int, rules=(), ub=None) -> RmpModel:
    """LP with x_T >= 0 for every rule-consistent tree of ``pool`` and omega >= 0, minimising omega."""
    rules = tuple(rules)
    trees = list(pool)
    top = max([t.weight for t in trees] + [ub or 0, 1])
    penalty = float((g.n + 1) * top)
    lp = LinearProgram("min", name="partition")
    omega = lp.add_var(0, math.inf, obj=1.0, name="omega")
    lp.add_row({}, GE, -k, name="trees")
    for v in range(g.n):
        lp.add_row({}, EQ, 1, name=f"cover_{v}")
    for v in range(g.n):
        lp.add_row({omega: 1.0}, GE, 0, name=f"weight_{v}")
    arts = []
    for v in range(g.n):
        j = lp.add_var(0, math.inf, obj=penalty, name=f"art_{v}")
        lp.rows[1 + v][0][j] = 1.0
        arts.append(j)
    model = RmpModel(g, k, rules, penalty, lp, omega, arts)
    model.add_trees(trees)
    return model


def solve_rmp_integer(model: RmpModel, time_limit=INTEGRAL_UB_TIME) -> MipResult:
    """The same model with x_T binary and the artificial columns switched off."""
    lp = model.lp.copy()
    for j in model.artificials:
        lp.hi[j] = 0.0
    for j in model.col_vars:
        lp.hi[j] = 1.0
    return solve_mip(MipSpec(lp, set(model.col_vars), integral_objective=True), time_limit=time_limit)


def pad_forest(g: WeightedGraph, trees, k: int) -> SpanningKForest:
    """Split trees at their heaviest edges until there are k of them (never raises the max)."""
    edges = set()
    for t in trees:
        edges |= set(t.edges)
    forest = forest_from_edges(g, edges)
    while forest.k < k:
        heavy = max((t for t in forest.trees if t.edges), key=lambda t: (t.weight, t.vertices))
        drop = max(heavy.edges, key=lambda e: (g.edges[e][2], e))
        edges.discard(drop)
        forest = forest_from_edges(g, edges)
    return forest


def forest_from_rmp(model: RmpModel, x, tol=1e-3) -> SpanningKForest:
    chosen = [model.columns[i] for i, j in enumerate(model.col_vars) if x[j] > 1 - tol]
    return pad_forest(model.g, chosen, model.k)
