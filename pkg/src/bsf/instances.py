"""Random instance generation, instance/solution text files, and named families."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import GenerationTimeout, InfeasibleDensity, ParseError
from .graph import SpanningKForest, WeightedGraph, is_connected

MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    p: float
    k: int
    seed: int = 0
    wmin: int = 1
    wmax: int = 100

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= self.k <= self.n:
            raise ValueError("k must lie in [1, n]")
        if not 0 < self.p <= 1:
            raise ValueError("density p must lie in (0, 1]")
        if not 0 <= self.wmin <= self.wmax:
            raise ValueError("bad weight range")

    @property
    def m(self) -> int:
        # guard against p*N landing a hair below an integer
        return math.floor(self.p * self.n * (self.n - 1) / 2 + 1e-9)


def _pair(index, n):
    # inverse of the row-major enumeration of pairs u < v
    u = 0
    row = n - 1
    while index >= row:
        index -= row
        u += 1
        row -= 1
    return u, u + 1 + index


def generate(spec: InstanceSpec, max_attempts: int = MAX_ATTEMPTS) -> tuple[WeightedGraph, int]:
    """Uniform connected G(n, m) with i.i.d. integer weights, deterministic in ``spec.seed``."""
    n, m = spec.n, spec.m
    if m < n - 1:
        raise InfeasibleDensity(f"m={m} edges cannot connect n={n} vertices")
    universe = n * (n - 1) // 2
    rng = random.Random(spec.seed)
    for _ in range(max_attempts):
        picks = sorted(rng.sample(range(universe), m))
        pairs = [_pair(i, n) for i in picks]
        skeleton = WeightedGraph(n, tuple((u, v, 0) for u, v in pairs))
        if not is_connected(skeleton):
            continue
        edges = tuple((u, v, rng.randint(spec.wmin, spec.wmax)) for u, v in pairs)
        return WeightedGraph(n, edges), spec.k
    raise GenerationTimeout(f"no connected graph for n={n}, m={m} after {max_attempts} attempts")


# ---------------------------------------------------------------------------
# text formats


def format_instance(g: WeightedGraph, k: int, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"{g.n} {g.m} {k}")
    lines.extend(f"{u} {v} {w}" for u, v, w in g.edges)
    return "\n".join(lines) + "\n"


def write_instance(g: WeightedGraph, k: int, path, comment=None):
    Path(path).write_text(format_instance(g, k, comment), encoding="utf-8")


def _ints(tokens, lineno, count):
    if len(tokens) != count:
        raise ParseError(f"expected {count} integers, got {len(tokens)}", lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-integer token in {' '.join(tokens)!r}", lineno) from None


def parse_instance(text: str) -> tuple[WeightedGraph, int]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line.split()))
    if not rows:
        raise ParseError("empty instance file", 1)
    lineno, head = rows[0]
    n, m, k = _ints(head, lineno, 3)
    if n < 1 or m < 0:
        raise ParseError("n must be positive and m non-negative", lineno)
    if not 1 <= k <= n:
        raise ParseError(f"k={k} outside [1, {n}]", lineno)
    if len(rows) - 1 != m:
        raise ParseError(f"header declares {m} edges, found {len(rows) - 1}", rows[-1][0])
    edges = []
    seen = set()
    for lineno, tokens in rows[1:]:
        u, v, w = _ints(tokens, lineno, 3)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex id outside [0, {n})", lineno)
        if u == v:
            raise ParseError("self-loop", lineno)
        if w < 0:
            raise ParseError("negative weight", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError("parallel edge", lineno)
        seen.add(key)
        edges.append((u, v, w))
    return WeightedGraph(n, tuple(edges)), k


def read_instance(path) -> tuple[WeightedGraph, int]:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def format_solution(forest: SpanningKForest, value: int | None = None) -> str:
    value = forest.value_minmax if value is None else value
    lines = [str(value)]
    for t in forest.trees:
        lines.append(" ".join(str(e) for e in sorted(t.edges)))
    return "\n".join(lines) + "\n"


def write_solution(forest: SpanningKForest, path, value=None):
    Path(path).write_text(format_solution(forest, value), encoding="utf-8")


def read_solution(path) -> tuple[int, list[list[int]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty solution file", 1)
    try:
        value = int(lines[0].strip())
        trees = [[int(t) for t in line.split()] for line in lines[1:]]
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return value, trees


# ---------------------------------------------------------------------------
# named families


def example_graph() -> WeightedGraph:
    """Eight-vertex example whose min-max optimum (k=2) is 4 and max-min optimum is 3.

    Vertex i here is v_{i+1} in the usual 1-based labelling.
    """
    v = {i: i - 1 for i in range(1, 9)}
    edges = [
        (v[1], v[2], 1),
        (v[2], v[5], 1),
        (v[5], v[3], 1),
        (v[3], v[4], 1),
        (v[2], v[3], 3),
        (v[5], v[6], 1),
        (v[6], v[7], 1),
        (v[8], v[6], 1),
    ]
    return WeightedGraph(8, tuple(edges))


def spider(k: int) -> WeightedGraph:
    """Unit-weight tree on which the k-approximation is tight.

    k paths u_i - a_i - l_i joined by edges u_k u_i.  Leaf edges a_i l_i carry
    the highest ids, so the higher-id-first tie-break strips them off first.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    u = lambda i: 3 * i
    a = lambda i: 3 * i + 1
    leaf = lambda i: 3 * i + 2
    edges = [(u(i), a(i), 1) for i in range(k)]
    edges += [(u(k - 1), u(i), 1) for i in range(k - 1)]
    edges += [(a(i), leaf(i), 1) for i in range(k)]
    return WeightedGraph(3 * k, tuple(edges))


def bad_family(k: int, tau: int) -> WeightedGraph:
    """k paths u_i-a_i-b_i-v_i (middle weight tau, ends 1) with hubs u_k, v_k joined by tau edges.

    Edge ids are ordered (unit edges, hub edges, middle edge of the last path,
    remaining middle edges) so that ``kruskal_mst`` drops exactly the middle
    edges of the first k-1 paths.
    """
    if k < 4 or k % 2:
        raise ValueError("k must be an even integer >= 4")
    if tau < 2:
        raise ValueError("tau must be at least 2")
    u = lambda i: 4 * i
    a = lambda i: 4 * i + 1
    b = lambda i: 4 * i + 2
    v = lambda i: 4 * i + 3
    edges = []
    for i in range(k):
        edges += [(u(i), a(i), 1), (b(i), v(i), 1)]
    for i in range(k - 1):
        edges += [(u(k - 1), u(i), tau), (v(k - 1), v(i), tau)]
    edges.append((a(k - 1), b(k - 1), tau))
    edges += [(a(i), b(i), tau) for i in range(k - 1)]
    return WeightedGraph(4 * k, tuple(edges))


def path_graph(weights) -> WeightedGraph:
    return WeightedGraph(len(weights) + 1, tuple((i, i + 1, w) for i, w in enumerate(weights)))


def star_graph(weights) -> WeightedGraph:
    return WeightedGraph(len(weights) + 1, tuple((0, i + 1, w) for i, w in enumerate(weights)))


def complete_graph(n, weight=1) -> WeightedGraph:
    return WeightedGraph(n, tuple((u, v, weight) for u in range(n) for v in range(u + 1, n)))
