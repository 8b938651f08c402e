"""Column generation and Ryan-Foster branch-and-price for min-max spanning k-forests."""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field

from .graph import SpanningKForest, WeightedGraph, is_connected
from .errors import DisconnectedGraph
from .heuristics import ColumnPool, heuristic_bnb, seed_columns, seeding_time_limit
from .mip import OPTIMAL as MIP_OPTIMAL, FEASIBLE
from .models.partition import build_rmp, forest_from_rmp, pad_forest, solve_rmp_integer
from .pricing import DualValues, price

log = logging.getLogger(__name__)

TOGETHER, APART = "together", "apart"
PAIR_TOL = 1e-6
LB_EPS = 1e-6
UB_UPDATE_COLUMNS = 50
UB_UPDATE_ITERATIONS = 20
UB_UPDATE_SECONDS = 30.0
INTEGER_RMP_TIME = 5.0
TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class BranchRule:
    u: int
    v: int
    kind: str

    def __post_init__(self):
        if self.kind not in (TOGETHER, APART):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.u > self.v:
            a, b = self.v, self.u
            object.__setattr__(self, "u", a)
            object.__setattr__(self, "v", b)
        if self.u == self.v:
            raise ValueError("a rule needs two distinct vertices")

    @property
    def pair(self):
        return self.u, self.v


@dataclass
class BnPNode:
    id: int
    rules: tuple = ()
    lb: float = -math.inf
    pair: tuple | None = None
    depth: int = 0

    def child(self, nid, rule: BranchRule):
        if any(r.pair == rule.pair for r in self.rules):
            raise ValueError(f"pair {rule.pair} is already ruled at this node")
        return BnPNode(nid, self.rules + (rule,), depth=self.depth + 1)


@dataclass
class CGResult:
    lb: float
    ub: float
    forest: SpanningKForest | None
    pair: tuple | None
    new_columns: list
    converged: bool
    lp_value: float
    iterations: int
    duals: DualValues | None = None


@dataclass
class BnPResult:
    value: float
    forest: SpanningKForest | None
    gap: float
    nodes: int
    columns: int
    status: str
    bound: float
    root_lp: float = math.nan
    log: list = field(default_factory=list, repr=False)


def pair_masses(model, x):
    """Sum of x_T over RMP columns holding both u and v, for every pair that shares a column."""
    masses = {}
    for t, val in zip(model.columns, x):
        vs = t.vertices
        for i, u in enumerate(vs):
            for v in vs[i + 1 :]:
                masses[u, v] = masses.get((u, v), 0.0) + val
    return masses


def choose_pair(model, x, rules):
    """Pair with mass closest to 0.5 (lexicographic on ties); None when every mass is integral."""
    ruled = {r.pair for r in rules}
    best, best_score = None, math.inf
    for pair, m in sorted(pair_masses(model, x).items()):
        if pair in ruled:
            continue
        if min(m - math.floor(m), math.ceil(m) - m) <= PAIR_TOL:
            continue
        score = abs(m - 0.5)
        if score < best_score - 1e-12:
            best, best_score = pair, score
    return best


def _partition_forest(g, model, x, k):
    """With integral pair masses the support splits V into blocks; keep the lightest column per block."""
    blocks = {}
    for t, val in zip(model.columns, x):
        if val > PAIR_TOL:
            cur = blocks.get(t.vertices)
            if cur is None or t.weight < cur.weight:
                blocks[t.vertices] = t
    return pad_forest(g, list(blocks.values()), k)


def column_generation(g: WeightedGraph, k: int, node: BnPNode, pool: ColumnPool, ub, time_limit=None,
                      best=None, root=False, run_log=None) -> CGResult:
    """Column generation at one node.  ``best`` is the incumbent forest matching ``ub``."""
    start = time.perf_counter()
    model = build_rmp(g, pool, k, node.rules, ub)
    new_columns = []
    since_update, iters_since, last_update = 0, 0, start
    iteration = 0
    converged = False
    sol = None
    while True:
        sol = model.solve()
        iteration += 1
        elapsed = time.perf_counter() - start
        if time_limit is not None and elapsed > time_limit:
            break
        if root and sol.omega <= ub - 1 and (
            since_update >= UB_UPDATE_COLUMNS
            or iters_since >= UB_UPDATE_ITERATIONS
            or time.perf_counter() - last_update >= UB_UPDATE_SECONDS
        ):
            res = solve_rmp_integer(model, INTEGER_RMP_TIME)
            if res.status in (MIP_OPTIMAL, FEASIBLE) and res.value < ub:
                forest = forest_from_rmp(model, res.x)
                if forest.value_minmax < ub:
                    ub, best = forest.value_minmax, forest
                    log.info("node %d: integer RMP improves UB to %d", node.id, ub)
            since_update, iters_since, last_update = 0, 0, time.perf_counter()
        if ub - 1 < 0:
            converged = True
            break
        duals = DualValues.from_rmp(sol)
        remaining = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))
        trees, strategy = price(g, duals, ub, node.rules, remaining)
        added = model.add_trees(trees)
        for t in trees:
            if pool.add(t, ub):
                new_columns.append(t)
        line = (f"node={node.id} iter={iteration} omega={sol.objective:.6g} |B|={len(duals.support())} "
                f"strategy={strategy} added={added}")
        log.info(line)
        if run_log is not None:
            run_log.append(line)
        since_update += added
        iters_since += 1
        if added == 0:
            converged = time_limit is None or time.perf_counter() - start <= time_limit
            break
    if not converged:
        return CGResult(-math.inf, ub, best, None, new_columns, False, sol.objective, iteration)
    # no further priced column can be re-added, so this is the node's LP value
    sol = model.solve()
    duals = DualValues.from_rmp(sol)
    if sol.artificial:
        return CGResult(math.inf, ub, best, None, new_columns, True, math.inf, iteration, duals)
    lb = math.ceil(sol.omega - LB_EPS)
    pair = None
    if lb <= ub - 1:
        pair = choose_pair(model, sol.x, node.rules)
        if pair is None:
            forest = _partition_forest(g, model, sol.x, k)
            if forest.value_minmax < ub:
                ub, best = forest.value_minmax, forest
    return CGResult(lb, ub, best, pair, new_columns, True, sol.omega, iteration, duals)


def branch_and_price(g: WeightedGraph, k: int, time_limit=60.0, seed=0, pool=None) -> BnPResult:
    start = time.perf_counter()
    if not is_connected(g):
        raise DisconnectedGraph("branch-and-price needs a connected graph")
    if not 1 <= k <= g.n:
        raise ValueError("k must lie in [1, n]")

    def left():
        return None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))

    heur = heuristic_bnb(g, k, time_limit=seeding_time_limit(g.n), pool=pool)
    ub, best = heur.ub, heur.forest
    pool = heur.pool
    seed_columns(g, k, ub, pool, rng_seed=seed)
    run_log = []
    ids = itertools.count()
    root = BnPNode(next(ids))
    cg = column_generation(g, k, root, pool, ub, left(), best, root=True, run_log=run_log)
    ub, best = cg.ub, cg.forest
    root.lb, root.pair = cg.lb, cg.pair
    root_lp = cg.lp_value
    nodes = 1
    queue = []
    timed_out = not cg.converged
    root_converged = cg.converged
    if cg.converged and root.lb <= ub - 1 and root.pair is not None:
        heapq.heappush(queue, (root.lb, -root.depth, root.id, root))
    while queue:
        if time_limit is not None and time.perf_counter() - start > time_limit:
            timed_out = True
            break
        lb, _, _, node = heapq.heappop(queue)
        if lb > ub - 1:
            continue
        u, v = node.pair
        for kind in (TOGETHER, APART):
            child = node.child(next(ids), BranchRule(u, v, kind))
            cg = column_generation(g, k, child, pool, ub, left(), best, run_log=run_log)
            nodes += 1
            ub, best = cg.ub, cg.forest
            if not cg.converged:
                # keep the child open under its parent's bound
                timed_out = True
                child.lb, child.pair = lb, None
                heapq.heappush(queue, (child.lb, -child.depth, child.id, child))
                continue
            child.lb, child.pair = cg.lb, cg.pair
            if child.lb <= ub - 1 and child.pair is not None:
                heapq.heappush(queue, (child.lb, -child.depth, child.id, child))
        if timed_out:
            break
    open_lbs = [item[0] for item in queue if item[0] <= ub - 1]
    if not root_converged:
        # a root that never converged gives no valid lower bound
        status, bound, gap = TIME_LIMIT, -math.inf, math.inf
    elif open_lbs:
        bound = math.ceil(min(open_lbs))
        status, gap = TIME_LIMIT, ((ub - bound) / ub if ub > 0 else 0.0)
    else:
        status, bound, gap = "Optimal", ub, 0.0
    return BnPResult(ub, best, gap, nodes, len(pool), status, bound, root_lp, run_log)
