"""Dense bounded-variable simplex.

Rows are turned into equalities with one slack per row (A x + s = b), the
slack bounds encoding the row sense.  The solver keeps an explicit basis
inverse, which is plenty at the sizes used here (a few hundred rows), and
offers a primal simplex (with a sum-of-infeasibilities phase 1) and a dual
simplex used for warm starts after bound changes or added rows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure

log = logging.getLogger(__name__)

INF = math.inf
LE, GE, EQ = "<=", ">=", "="
OPTIMAL, INFEASIBLE, UNBOUNDED = "Optimal", "Infeasible", "Unbounded"

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 50
MAX_REPAIRS = 5

# nonbasic status codes
BASIC, AT_LO, AT_HI, AT_ZERO = 0, 1, 2, 3


class LinearProgram:
    """Builder for ``min/max c x  s.t.  rows,  lo <= x <= hi``."""

    def __init__(self, sense="min", name="lp"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.name = name
        self.lo, self.hi, self.obj, self.var_names = [], [], [], []
        self.rows, self.row_names = [], []

    @property
    def n_vars(self):
        return len(self.obj)

    @property
    def n_rows(self):
        return len(self.rows)

    def add_var(self, lo=0.0, hi=INF, obj=0.0, name=None) -> int:
        if lo > hi:
            raise ValueError(f"variable {name}: lower bound {lo} exceeds upper bound {hi}")
        self.lo.append(float(lo))
        self.hi.append(float(hi))
        self.obj.append(float(obj))
        self.var_names.append(name or f"x_{len(self.obj) - 1}")
        return len(self.obj) - 1

    def add_row(self, coefs, sense, rhs, name=None) -> int:
        if sense not in (LE, GE, EQ):
            raise ValueError(f"unknown row sense {sense!r}")
        items = coefs.items() if isinstance(coefs, dict) else coefs
        merged = {}
        for j, a in items:
            if not 0 <= j < self.n_vars:
                raise IndexError(f"row refers to unknown variable {j}")
            merged[j] = merged.get(j, 0.0) + float(a)
        self.rows.append((merged, sense, float(rhs)))
        self.row_names.append(name or f"r_{len(self.rows) - 1}")
        return len(self.rows) - 1

    def copy(self) -> "LinearProgram":
        out = LinearProgram(self.sense, self.name)
        out.lo, out.hi, out.obj = list(self.lo), list(self.hi), list(self.obj)
        out.var_names = list(self.var_names)
        out.rows = [(dict(c), s, r) for c, s, r in self.rows]
        out.row_names = list(self.row_names)
        return out

    def dense(self):
        a = np.zeros((self.n_rows, self.n_vars))
        for i, (coefs, _, _) in enumerate(self.rows):
            for j, v in coefs.items():
                a[i, j] = v
        return a


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = None
    duals: np.ndarray = None
    reduced_costs: np.ndarray = None
    objective: float = math.nan
    iterations: int = 0
    basis: tuple = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status == OPTIMAL


def _slack_bounds(sense):
    if sense == LE:
        return 0.0, INF
    if sense == GE:
        return -INF, 0.0
    return 0.0, 0.0


class _BasisRepaired(Exception):
    """Raised mid-iteration when the basis had to be repaired; the solve restarts."""


class Simplex:
    """Stateful solver over one LinearProgram; supports warm re-solves.

    Internal columns are structural variables followed by one slack per row,
    in creation order; ``col_of_var`` and ``slack_of_row`` map into them.
    Everything is kept in minimisation form.
    """

    def __init__(self, lp: LinearProgram):
        self.sign = 1.0 if lp.sense == "min" else -1.0
        n, m = lp.n_vars, lp.n_rows
        self.n_struct = n
        self.m = m
        self.a = np.zeros((m, n + m))
        self.a[:, :n] = lp.dense()
        self.a[np.arange(m), n + np.arange(m)] = 1.0
        self.b = np.array([r for _, _, r in lp.rows], dtype=float)
        slack = [_slack_bounds(s) for _, s, _ in lp.rows]
        self.lo = np.array(lp.lo + [s[0] for s in slack], dtype=float)
        self.hi = np.array(lp.hi + [s[1] for s in slack], dtype=float)
        self.c = np.concatenate([self.sign * np.array(lp.obj, dtype=float), np.zeros(m)])
        self.col_of_var = list(range(n))
        self.slack_of_row = [n + i for i in range(m)]
        self.row_of_col = np.concatenate([np.full(n, -1), np.arange(m)])
        self.version = 0
        self.status = np.zeros(n + m, dtype=np.int8)
        self.x = np.zeros(n + m)
        for j in range(n):
            self._park(j)
        self.head = np.array(self.slack_of_row, dtype=int)
        self.status[self.head] = BASIC
        self.binv = np.eye(m)
        self.pivots = 0
        self.iterations = 0
        self._compute_xb()

    # -- bookkeeping -------------------------------------------------------

    @property
    def ncols(self):
        return self.a.shape[1]

    def _park(self, j, prefer=None):
        """Make column j nonbasic at a finite bound (or at zero if free)."""
        lo, hi = self.lo[j], self.hi[j]
        if prefer == AT_HI and hi < INF:
            self.status[j], self.x[j] = AT_HI, hi
        elif lo > -INF:
            self.status[j], self.x[j] = AT_LO, lo
        elif hi < INF:
            self.status[j], self.x[j] = AT_HI, hi
        else:
            self.status[j], self.x[j] = AT_ZERO, 0.0

    def _compute_xb(self):
        xn = self.x.copy()
        xn[self.head] = 0.0
        self.x[self.head] = self.binv @ (self.b - self.a @ xn)

    def refactor(self) -> bool:
        """Rebuild the basis inverse, inverting only the block of basic structural columns.

        A (numerically) singular basis is repaired by swapping dependent
        columns for slacks; returns True when that happened.
        """
        m = self.m
        self.pivots = 0
        if m == 0:
            self.binv = np.eye(0)
            return False
        repaired = False
        binv = self._factor()
        if binv is None:
            self._repair()
            repaired = True
            binv = self._factor()
            if binv is None:
                raise NumericalFailure("singular basis after repair")
        self.binv = binv
        self._compute_xb()
        return repaired

    def _factor(self):
        rows_of = self.row_of_col[self.head]
        slack_pos = np.flatnonzero(rows_of >= 0)
        struct_pos = np.flatnonzero(rows_of < 0)
        r1 = rows_of[slack_pos]
        mask = np.ones(self.m, dtype=bool)
        mask[r1] = False
        r2 = np.flatnonzero(mask)
        cols = self.head[struct_pos]
        binv = np.zeros((self.m, self.m))
        binv[slack_pos, r1] = 1.0
        if len(cols):
            block = self.a[np.ix_(r2, cols)]
            try:
                cinv = np.linalg.inv(block)
            except np.linalg.LinAlgError:
                return None
            if np.abs(cinv @ block - np.eye(len(cols))).max() > 1e-6:
                return None
            binv[np.ix_(struct_pos, r2)] = cinv
            binv[np.ix_(slack_pos, r2)] = -self.a[np.ix_(r1, cols)] @ cinv
        return binv

    def _repair(self):
        """Keep a maximal independent set of basic columns and complete it with slacks."""
        m = self.m
        q = np.zeros((m, 0))
        keep = []
        for pos, j in enumerate(self.head):
            col = self.a[:, j]
            res = col - q @ (q.T @ col)
            res = res - q @ (q.T @ res)
            norm = np.linalg.norm(res)
            if norm > 1e-9 * max(1.0, np.linalg.norm(col)):
                q = np.hstack([q, (res / norm)[:, None]])
                keep.append(pos)
        dropped = [pos for pos in range(m) if pos not in set(keep)]
        fill = []
        for i in range(m):
            if len(keep) + len(fill) == m:
                break
            e = np.zeros(m)
            e[i] = 1.0
            res = e - q @ (q.T @ e)
            res = res - q @ (q.T @ res)
            norm = np.linalg.norm(res)
            if norm > 1e-6:
                q = np.hstack([q, (res / norm)[:, None]])
                fill.append(self.slack_of_row[i])
        log.debug("basis repair: %d columns swapped for slacks", len(dropped))
        for pos, j in zip(dropped, fill):
            out = self.head[pos]
            self.head[pos] = j
            self.status[j] = BASIC
            self._park(out)
        self.version += 1

    def _pivot(self, r, q, alpha):
        piv = alpha[r]
        row = self.binv[r] / piv
        self.binv -= np.outer(alpha, row)
        self.binv[r] = row
        self.head[r] = q
        self.status[q] = BASIC
        self.pivots += 1
        self.version += 1
        if self.pivots >= REFACTOR_EVERY:
            if self.refactor():
                raise _BasisRepaired()
        else:
            self._compute_xb()

    def _infeasibility(self):
        xb = self.x[self.head]
        below = self.lo[self.head] - xb
        above = xb - self.hi[self.head]
        return below, above

    def primal_feasible(self, tol=PRIMAL_TOL):
        below, above = self._infeasibility()
        return bool(np.all(below <= tol) and np.all(above <= tol))

    def reduced_costs(self, c):
        y = c[self.head] @ self.binv
        return y, c - y @ self.a

    def dual_feasible(self, c, tol=DUAL_TOL):
        _, d = self.reduced_costs(c)
        st = self.status
        movable = self.lo < self.hi
        bad = ((st == AT_LO) & movable & (d < -tol)) | ((st == AT_HI) & movable & (d > tol))
        bad |= (st == AT_ZERO) & (np.abs(d) > tol)
        return not bad.any()

    # -- modifications -----------------------------------------------------

    def set_var_bounds(self, j, lo, hi, update=True):
        """Change the bounds of variable j; pass ``update=False`` to batch several before ``refresh``."""
        col = self.col_of_var[j]
        self.lo[col], self.hi[col] = lo, hi
        if self.status[col] != BASIC:
            self._park(col, prefer=self.status[col])
            if update:
                self._compute_xb()

    def refresh(self):
        """Recompute basic values after batched bound changes."""
        self._compute_xb()

    def add_rows(self, rows):
        """Append rows ``(coefs, sense, rhs)``; their slacks join the basis."""
        if not rows:
            return
        k = len(rows)
        old_m, old_cols = self.m, self.ncols
        block = np.zeros((k, old_cols + k))
        for t, (coefs, sense, rhs) in enumerate(rows):
            for j, v in coefs.items():
                block[t, self.col_of_var[j]] += v
            block[t, old_cols + t] = 1.0
        self.a = np.vstack([np.hstack([self.a, np.zeros((old_m, k))]), block])
        self.b = np.concatenate([self.b, [r for _, _, r in rows]])
        bounds = [_slack_bounds(s) for _, s, _ in rows]
        self.lo = np.concatenate([self.lo, [s[0] for s in bounds]])
        self.hi = np.concatenate([self.hi, [s[1] for s in bounds]])
        self.c = np.concatenate([self.c, np.zeros(k)])
        self.x = np.concatenate([self.x, np.zeros(k)])
        self.status = np.concatenate([self.status, np.full(k, BASIC, dtype=np.int8)])
        new_slacks = list(range(old_cols, old_cols + k))
        self.slack_of_row.extend(new_slacks)
        self.row_of_col = np.concatenate([self.row_of_col, np.arange(old_m, old_m + k)])
        # block-triangular inverse update
        nb = block[:, self.head]
        binv = np.zeros((old_m + k, old_m + k))
        binv[:old_m, :old_m] = self.binv
        binv[old_m:, :old_m] = -nb @ self.binv
        binv[old_m:, old_m:] = np.eye(k)
        self.binv = binv
        self.head = np.concatenate([self.head, new_slacks])
        self.m += k
        self._compute_xb()

    def add_columns(self, cols):
        """Append structural columns ``(lo, hi, obj, {row: coef})``; they start nonbasic."""
        if not cols:
            return []
        k = len(cols)
        block = np.zeros((self.m, k))
        for t, (_, _, _, coefs) in enumerate(cols):
            for i, v in coefs.items():
                block[i, t] = v
        start = self.ncols
        self.a = np.hstack([self.a, block])
        self.lo = np.concatenate([self.lo, [c[0] for c in cols]])
        self.hi = np.concatenate([self.hi, [c[1] for c in cols]])
        self.c = np.concatenate([self.c, [self.sign * c[2] for c in cols]])
        self.x = np.concatenate([self.x, np.zeros(k)])
        self.status = np.concatenate([self.status, np.zeros(k, dtype=np.int8)])
        self.row_of_col = np.concatenate([self.row_of_col, np.full(k, -1)])
        ids = []
        for t in range(k):
            self.col_of_var.append(start + t)
            self._park(start + t)
            ids.append(self.n_struct)
            self.n_struct += 1
        self._compute_xb()
        return ids

    def snapshot(self):
        return self.head.copy(), self.status.copy(), self.m, self.version

    def restore(self, snap):
        head, status, m, version = snap
        if version == self.version and m == self.m:
            # same basic set; bound flips may still differ, so take the saved statuses
            self.status[: len(status)] = status
            for j in np.flatnonzero(self.status != BASIC):
                self._park(j, prefer=self.status[j])
            self._compute_xb()
            return
        self.version += 1
        ncols = self.ncols
        status = np.concatenate([status, np.full(ncols - len(status), BASIC, dtype=np.int8)])
        head = np.concatenate([head, self.slack_of_row[m:]]).astype(int)
        self.head, self.status = head, status
        for j in np.flatnonzero(status != BASIC):
            self._park(j, prefer=status[j])
        self.refactor()

    # -- algorithms --------------------------------------------------------

    def _primal(self, c=None, max_iter=None):
        """Primal simplex.  With ``c=None`` minimises the sum of bound violations."""
        phase1 = c is None
        degenerate = 0
        max_iter = max_iter or 50 * (self.ncols + self.m) + 1000
        movable = self.lo < self.hi
        for _ in range(max_iter):
            if phase1:
                below, above = self._infeasibility()
                if np.all(below <= PRIMAL_TOL) and np.all(above <= PRIMAL_TOL):
                    return OPTIMAL
                cost = np.zeros(self.ncols)
                cost[self.head] = np.where(below > PRIMAL_TOL, -1.0, np.where(above > PRIMAL_TOL, 1.0, 0.0))
            else:
                cost = c
            _, d = self.reduced_costs(cost)
            st = self.status
            up = ((st == AT_LO) | (st == AT_ZERO)) & movable & (d < -DUAL_TOL)
            down = ((st == AT_HI) | (st == AT_ZERO)) & movable & (d > DUAL_TOL)
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                return INFEASIBLE if phase1 else OPTIMAL
            bland = degenerate >= DEGENERATE_SWITCH
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if up[q] else -1.0
            alpha = self.binv @ self.a[:, q]
            delta = -direction * alpha  # change of x_B per unit step
            xb = self.x[self.head]
            lob, hib = self.lo[self.head], self.hi[self.head]
            ratios = np.full(self.m, INF)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            if phase1:
                # infeasible basics stop at the bound they are heading to
                low_bad = xb < lob - PRIMAL_TOL
                high_bad = xb > hib + PRIMAL_TOL
                ok = ~low_bad & ~high_bad
                m1 = dec & ok & (lob > -INF)
                ratios[m1] = (xb[m1] - lob[m1]) / -delta[m1]
                m2 = inc & ok & (hib < INF)
                ratios[m2] = (hib[m2] - xb[m2]) / delta[m2]
                m3 = inc & low_bad
                ratios[m3] = (lob[m3] - xb[m3]) / delta[m3]
                m4 = dec & high_bad
                ratios[m4] = (xb[m4] - hib[m4]) / -delta[m4]
            else:
                m1 = dec & (lob > -INF)
                ratios[m1] = (xb[m1] - lob[m1]) / -delta[m1]
                m2 = inc & (hib < INF)
                ratios[m2] = (hib[m2] - xb[m2]) / delta[m2]
            ratios = np.maximum(ratios, 0.0)
            t_flip = self.hi[q] - self.lo[q]
            t_row = ratios.min() if self.m else INF
            self.iterations += 1
            if t_flip <= t_row:
                if t_flip == INF:
                    if phase1:
                        raise NumericalFailure("unbounded ray in phase 1")
                    return UNBOUNDED
                self.status[q] = AT_HI if direction > 0 else AT_LO
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                self._compute_xb()
                degenerate = 0
                continue
            ties = np.flatnonzero(ratios <= t_row + 1e-12)
            if bland:
                r = int(ties[np.argmin(self.head[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leave = self.head[r]
            target_lo = delta[r] < 0
            if phase1 and (xb[r] < lob[r] - PRIMAL_TOL):
                target_lo = True
            elif phase1 and (xb[r] > hib[r] + PRIMAL_TOL):
                target_lo = False
            degenerate = degenerate + 1 if t_row <= 1e-12 else 0
            self.x[q] += direction * t_row
            self.status[leave] = AT_LO if target_lo else AT_HI
            self.x[leave] = self.lo[leave] if target_lo else self.hi[leave]
            if not np.isfinite(self.x[leave]):
                self._park(leave)
            self._pivot(r, q, alpha)
        raise NumericalFailure("primal simplex iteration limit")

    def _dual(self, c, max_iter=None):
        """Dual simplex from a dual feasible basis."""
        max_iter = max_iter or 50 * (self.ncols + self.m) + 1000
        movable = self.lo < self.hi
        stalls = 0
        for _ in range(max_iter):
            below, above = self._infeasibility()
            viol = np.maximum(below, above)
            if viol.size == 0 or viol.max() <= PRIMAL_TOL:
                return OPTIMAL
            bland = stalls >= DEGENERATE_SWITCH
            if bland:
                bad = np.flatnonzero(viol > PRIMAL_TOL)
                r = int(bad[np.argmin(self.head[bad])])
            else:
                r = int(np.argmax(viol))
            raise_it = below[r] > PRIMAL_TOL
            row = self.binv[r] @ self.a
            _, d = self.reduced_costs(c)
            st = self.status
            free = st == AT_ZERO
            can_up = ((st == AT_LO) | free) & movable
            can_down = ((st == AT_HI) | free) & movable
            if raise_it:
                elig = (can_up & (row < -PIVOT_TOL)) | (can_down & (row > PIVOT_TOL))
            else:
                elig = (can_up & (row > PIVOT_TOL)) | (can_down & (row < -PIVOT_TOL))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return INFEASIBLE
            ratio = np.abs(d[cand]) / np.abs(row[cand])
            best = ratio.min()
            ties = cand[ratio <= best + 1e-12]
            q = int(ties[0]) if bland else int(ties[np.argmax(np.abs(row[ties]))])
            stalls = stalls + 1 if best <= 1e-12 else 0
            leave = self.head[r]
            alpha = self.binv @ self.a[:, q]
            if raise_it:
                self.status[leave], self.x[leave] = AT_LO, self.lo[leave]
            else:
                self.status[leave], self.x[leave] = AT_HI, self.hi[leave]
            self.iterations += 1
            self._pivot(r, q, alpha)
        raise NumericalFailure("dual simplex iteration limit")

    def solve(self) -> str:
        for _ in range(MAX_REPAIRS):
            try:
                return self._solve_once()
            except _BasisRepaired:
                continue
        raise NumericalFailure("basis repaired too often")

    def _solve_once(self) -> str:
        c = self.c
        status = None
        if not self.primal_feasible():
            if self.dual_feasible(c):
                status = self._dual(c)
                if status == INFEASIBLE:
                    return INFEASIBLE
            if not self.primal_feasible():
                if self._primal(None) == INFEASIBLE:
                    return INFEASIBLE
        status = self._primal(c)
        if status == OPTIMAL and self.pivots >= 8:
            # clean up drift from rank-one updates before reporting
            if self.refactor():
                raise _BasisRepaired()
            if not self.primal_feasible(1e-7):
                if self._primal(None) == INFEASIBLE:
                    return INFEASIBLE
                status = self._primal(c)
        return status

    def solution(self, status) -> LpSolution:
        if status != OPTIMAL:
            return LpSolution(status, iterations=self.iterations)
        y, d = self.reduced_costs(self.c)
        cols = np.array(self.col_of_var, dtype=int)
        x = self.x[cols].copy()
        obj = float(self.sign * (self.c[cols] @ x))
        rows = np.array(self.slack_of_row, dtype=int)
        # a row dual is the negated reduced cost of its slack
        duals = self.sign * -d[rows]
        return LpSolution(OPTIMAL, x, duals, self.sign * d[cols], obj, self.iterations, self.snapshot())


def solve_lp(lp: LinearProgram, basis=None) -> LpSolution:
    solver = Simplex(lp)
    if basis is not None:
        solver.restore(basis)
    status = solver.solve()
    return solver.solution(status)
