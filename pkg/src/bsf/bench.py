"""Running methods on instances, CSV records and performance profiles."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import MissingCell
from .graph import WeightedGraph
from .heuristics import heuristic_bnb, k_approx, seeding_time_limit
from .mip import FEASIBLE, OPTIMAL, TIME_LIMIT, solve_mip

METHODS = ("approx", "heur", "flow", "flow-maxmin", "cyc", "bp", "oracle")
MAXMIN_METHODS = ("flow-maxmin",)
DEFAULT_TIME_LIMIT = 60.0


@dataclass
class RunRecord:
    instance: str
    method: str
    status: str
    value: float
    bound: float
    gap: float
    time_ms: float
    nodes: int
    columns: int

    def __post_init__(self):
        if math.isnan(self.gap) and math.isfinite(self.value) and math.isfinite(self.bound):
            self.gap = record_gap(self.method, self.value, self.bound)

    @property
    def solved(self):
        return self.status == OPTIMAL


def record_gap(method, value, bound):
    if method in MAXMIN_METHODS:
        return (bound - value) / max(1.0, abs(value))
    return (value - bound) / max(1.0, abs(value))


FIELDS = [f.name for f in fields(RunRecord)]


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.6g}" if x != int(x) or abs(x) >= 1e15 else str(int(x))
    return str(x)


def format_records(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def write_records(records, path):
    Path(path).write_text(format_records(records), encoding="utf-8")


def _num(s):
    return math.nan if s == "" else float(s)


def parse_records(text: str) -> list[RunRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        out.append(RunRecord(row["instance"], row["method"], row["status"], _num(row["value"]), _num(row["bound"]),
                             _num(row["gap"]), _num(row["time_ms"]), int(row["nodes"] or 0),
                             int(row["columns"] or 0)))
    return out


def read_records(path) -> list[RunRecord]:
    return parse_records(Path(path).read_text(encoding="utf-8"))


# -- running ---------------------------------------------------------------


def run_method(g: WeightedGraph, k: int, method: str, time_limit=DEFAULT_TIME_LIMIT, seed=0, name="") -> tuple:
    """Solve with one method; returns (RunRecord, forest or None)."""
    from .bnp import branch_and_price
    from .models import (build_cycle_minmax, build_flow_maxmin, build_flow_minmax, cycle_vector,
                         extract_forest_from_cycle, extract_forest_from_flow, flow_vector)
    from .oracle import exact_minmax

    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    start = time.perf_counter()
    forest = None
    nodes = columns = 0
    bound = math.nan
    if method == "approx":
        forest = k_approx(g, k)
        status, value = FEASIBLE, forest.value_minmax
    elif method == "heur":
        h = heuristic_bnb(g, k, time_limit=time_limit)
        forest, status, value, nodes, columns = h.forest, FEASIBLE, h.ub, h.nodes, len(h.pool)
    elif method == "oracle":
        value, forest = exact_minmax(g, k)
        status, bound = OPTIMAL, value
    elif method == "bp":
        r = branch_and_price(g, k, time_limit=time_limit, seed=seed)
        forest, value, bound, nodes, columns = r.forest, r.value, r.bound, r.nodes, r.columns
        status = OPTIMAL if r.status == "Optimal" else FEASIBLE
    else:
        if method == "flow-maxmin":
            model = build_flow_maxmin(g, k)
            spec = model.spec
        else:
            h = heuristic_bnb(g, k, time_limit=seeding_time_limit(g.n))
            if method == "flow":
                model = build_flow_minmax(g, k, h.ub)
                model.spec.incumbent = flow_vector(model, h.forest)
            else:
                model = build_cycle_minmax(g, k)
                model.spec.incumbent = cycle_vector(model, h.forest)
            spec = model.spec
        left = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))
        res = solve_mip(spec, time_limit=left)
        status, nodes = res.status, res.nodes
        value = float(res.value) if res.x is not None else math.nan
        bound = float(res.bound)
        if res.x is not None:
            if method.startswith("flow"):
                forest = extract_forest_from_flow(model, res.x)
            else:
                forest = extract_forest_from_cycle(model, res.x)
    elapsed = (time.perf_counter() - start) * 1000.0
    value = float(value)
    bound = float(bound)
    rec = RunRecord(name, method, status, value, bound, math.nan, round(elapsed, 3), int(nodes), int(columns))
    return rec, forest


def bench(instances, methods, time_limit=DEFAULT_TIME_LIMIT, seed=0, workers=1):
    """``instances`` is a list of (name, graph, k).  Records come back in (instance, method) order."""
    jobs = [(name, g, k, m) for name, g, k in instances for m in methods]
    if workers <= 1:
        return [run_method(g, k, m, time_limit, seed, name)[0] for name, g, k, m in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_job, name, g, k, m, time_limit, seed) for name, g, k, m in jobs]
        return [f.result() for f in futs]


def _job(name, g, k, m, time_limit, seed):
    return run_method(g, k, m, time_limit, seed, name)[0]


# -- performance profiles ----------------------------------------------------


@dataclass
class ProfileCurve:
    method: str
    points: list  # (tau, rho) breakpoints, tau ascending

    def __call__(self, tau) -> float:
        rho = 0.0
        for t, r in self.points:
            if t <= tau + 1e-12:
                rho = r
        return rho


def performance_ratios(records, methods=None):
    """r[p][a] = t[p][a] / min_b t[p][b], with unsolved runs at +inf."""
    table = {}
    for r in records:
        table.setdefault(r.instance, {})[r.method] = r
    methods = sorted({r.method for r in records}) if methods is None else list(methods)
    ratios = {}
    for p in sorted(table):
        row = table[p]
        for a in methods:
            if a not in row:
                raise MissingCell(f"no record for instance {p!r}, method {a!r}")
        times = {a: (max(row[a].time_ms, 1e-9) if row[a].solved else math.inf) for a in methods}
        best = min(times.values())
        ratios[p] = {a: (times[a] / best if math.isfinite(times[a]) else math.inf) for a in methods}
    return ratios, methods


def performance_profile(records, methods=None) -> list[ProfileCurve]:
    ratios, methods = performance_ratios(records, methods)
    n = len(ratios)
    curves = []
    for a in methods:
        rs = sorted(r[a] for r in ratios.values() if math.isfinite(r[a]))
        points = []
        for i, t in enumerate(rs):
            frac = (i + 1) / n
            if points and abs(points[-1][0] - t) <= 1e-12:
                points[-1] = (t, frac)
            else:
                points.append((t, frac))
        curves.append(ProfileCurve(a, points))
    return curves


def format_profile_csv(curves) -> str:
    lines = ["method,tau,rho"]
    for c in curves:
        lines.extend(f"{c.method},{t:.6g},{r:.6g}" for t, r in c.points)
    return "\n".join(lines) + "\n"


def profile_plot(curves, width=60, height=11, tau_max=None) -> str:
    """Plain-text step plot of rho(tau) on a log2 tau axis, one glyph per method."""
    finite = [t for c in curves for t, _ in c.points]
    tau_max = tau_max or max(finite + [2.0])
    span = max(math.log2(tau_max), 1e-9)
    glyphs = "*o+x#@%&"
    grid = [[" "] * width for _ in range(height)]
    for ci, c in enumerate(curves):
        for col in range(width):
            tau = 2 ** (span * col / (width - 1))
            rho = c(tau)
            row = height - 1 - int(round(rho * (height - 1)))
            if grid[row][col] == " ":
                grid[row][col] = glyphs[ci % len(glyphs)]
    out = []
    for i, line in enumerate(grid):
        label = f"{1 - i / (height - 1):4.2f}" if i in (0, height // 2, height - 1) else "    "
        out.append(f"{label} |{''.join(line)}")
    out.append("     +" + "-" * width)
    out.append(f"      tau = 1{' ' * (width - 14)}{tau_max:.3g}")
    out.extend(f"      {glyphs[i % len(glyphs)]} {c.method}" for i, c in enumerate(curves))
    return "\n".join(out) + "\n"
