"""Best-first branch and bound over the simplex in ``lp``, with a lazy-cut hook."""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalFailure
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, Simplex

log = logging.getLogger(__name__)

INT_TOL = 1e-6
FEASIBLE, TIME_LIMIT = "Feasible", "TimeLimit"


@dataclass
class MipSpec:
    """LP plus integrality, an optional lazy-cut callback and a warm start.

    ``lazy(x)`` receives the structural vector of an integral candidate and
    returns rows ``(coefs, sense, rhs)`` it violates (empty if it is fine).
    ``integral_objective`` declares that every feasible point has an integer
    objective, which lets bounds be rounded up before pruning.
    """

    lp: LinearProgram
    integers: frozenset = frozenset()
    lazy: Callable | None = None
    incumbent: np.ndarray | None = None
    integral_objective: bool = False

    def __post_init__(self):
        self.integers = frozenset(self.integers)
        for j in self.integers:
            if not (math.isfinite(self.lp.lo[j]) and math.isfinite(self.lp.hi[j])):
                raise ValueError(f"integer variable {self.lp.var_names[j]} needs finite bounds")


@dataclass
class MipResult:
    status: str
    x: np.ndarray | None
    value: float
    bound: float
    nodes: int
    elapsed: float
    incumbents: list = field(default_factory=list, repr=False)
    cuts: int = 0

    @property
    def gap(self) -> float:
        if self.x is None or not math.isfinite(self.bound):
            return math.inf
        return abs(self.value - self.bound) / max(1.0, abs(self.value))


@dataclass(order=True)
class _Node:
    key: tuple
    bounds: dict = field(compare=False)
    basis: tuple = field(compare=False)
    depth: int = field(compare=False, default=0)


def _most_fractional(x, integers):
    best, best_j = -1.0, None
    for j in sorted(integers):
        f = x[j] - math.floor(x[j])
        if min(f, 1 - f) <= INT_TOL:
            continue
        score = 0.5 - abs(f - 0.5)
        if score > best + 1e-12:
            best, best_j = score, j
    return best_j


def solve_mip(spec: MipSpec, time_limit=None, relative_gap_tol=1e-5, node_limit=None) -> MipResult:
    start = time.perf_counter()
    lp = spec.lp
    sign = 1.0 if lp.sense == "min" else -1.0  # internal search minimises sign * objective
    obj = np.array(lp.obj)
    solver = Simplex(lp)
    root_lo, root_hi = list(lp.lo), list(lp.hi)
    ints = sorted(spec.integers)

    best_x, best_val = None, math.inf  # internal (minimised) value
    incumbents = []
    if spec.incumbent is not None:
        best_x = np.asarray(spec.incumbent, dtype=float)
        best_val = sign * float(obj @ best_x)
        incumbents.append(best_x.copy())

    def rounded(bound):
        if spec.integral_objective and math.isfinite(bound):
            return math.ceil(bound - 1e-6)
        return bound

    def prunable(bound):
        if best_x is None:
            return False
        b = rounded(bound)
        if b >= best_val - 1e-9:
            return True
        return (best_val - b) / max(1.0, abs(best_val)) <= relative_gap_tol

    ids = itertools.count()
    queue = [_Node((-math.inf, 0, next(ids)), {}, None, 0)]
    nodes = 0
    ncuts = 0
    current = {}
    timed_out = False
    while queue:
        if time_limit is not None and time.perf_counter() - start > time_limit:
            timed_out = True
            break
        if node_limit is not None and nodes >= node_limit:
            timed_out = True
            break
        node = heapq.heappop(queue)
        if prunable(node.key[0]):
            continue
        nodes += 1
        # move the solver to this node's bounds
        for j in set(current) | set(node.bounds):
            lo, hi = node.bounds.get(j, (root_lo[j], root_hi[j]))
            solver.set_var_bounds(j, lo, hi, update=False)
        current = dict(node.bounds)
        if node.basis is not None:
            solver.restore(node.basis)
        else:
            solver.refresh()
        while True:
            status = solver.solve()
            if status != OPTIMAL:
                break
            sol = solver.solution(status)
            x = sol.x
            val = sign * sol.objective
            if prunable(val):
                status = "pruned"
                break
            j = _most_fractional(x, ints)
            if j is not None:
                break
            rows = spec.lazy(x) if spec.lazy is not None else None
            if rows:
                ncuts += len(rows)
                solver.add_rows(list(rows))
                continue
            if spec.integral_objective and abs(val - round(val)) <= 1e-6:
                val = float(round(val))
            best_x, best_val = x.copy(), val
            incumbents.append(best_x)
            log.debug("mip: incumbent %.6g at node %d", sign * val, nodes)
            status = "integral"
            break
        if status == UNBOUNDED:
            if nodes == 1:
                return MipResult(UNBOUNDED, None, sign * -math.inf, sign * -math.inf, nodes,
                                 time.perf_counter() - start, incumbents, ncuts)
            raise NumericalFailure("unbounded subproblem below a bounded root")
        if status != OPTIMAL:
            continue
        basis = solver.snapshot()
        v = x[j]
        down = dict(node.bounds)
        down[j] = (node.bounds.get(j, (root_lo[j], root_hi[j]))[0], math.floor(v))
        up = dict(node.bounds)
        up[j] = (math.ceil(v), node.bounds.get(j, (root_lo[j], root_hi[j]))[1])
        for child in (down, up):
            heapq.heappush(queue, _Node((val, -(node.depth + 1), next(ids)), child, basis, node.depth + 1))

    elapsed = time.perf_counter() - start
    open_bounds = [n.key[0] for n in queue if not prunable(n.key[0])]
    if best_x is None:
        if timed_out:
            bound = min(open_bounds, default=math.inf)
            return MipResult(TIME_LIMIT, None, math.nan, sign * bound, nodes, elapsed, incumbents, ncuts)
        return MipResult(INFEASIBLE, None, math.nan, sign * math.inf, nodes, elapsed, incumbents, ncuts)
    if timed_out and open_bounds:
        bound = min(min(open_bounds), best_val)
        return MipResult(FEASIBLE, best_x, sign * best_val, sign * rounded(bound), nodes, elapsed, incumbents, ncuts)
    return MipResult(OPTIMAL, best_x, sign * best_val, sign * best_val, nodes, elapsed, incumbents, ncuts)


def lp_relaxation(spec: MipSpec, separate=True, max_rounds=200):
    """Root LP value, optionally strengthened with lazy rows found on fractional points."""
    solver = Simplex(spec.lp)
    for _ in range(max_rounds):
        status = solver.solve()
        if status != OPTIMAL:
            return solver.solution(status)
        sol = solver.solution(status)
        rows = spec.lazy(sol.x) if (separate and spec.lazy is not None) else None
        if not rows:
            return sol
        solver.add_rows(list(rows))
    return sol
