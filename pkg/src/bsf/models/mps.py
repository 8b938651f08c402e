"""MPS export/import of our own models, plus a readable LP dump for debugging."""
from __future__ import annotations

import math
from pathlib import Path

from ..errors import ParseError
from ..lp import EQ, GE, LE, LinearProgram
from ..mip import MipSpec

_SENSE_CODE = {LE: "L", GE: "G", EQ: "E"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


def _num(x) -> str:
    return f"{x:.12g}"


def _field(code, name, rest=""):
    # fixed-format column positions; longer names simply push the line right
    line = f" {code:<2} {name:<8}"
    return (line + "  " + rest).rstrip() if rest else line.rstrip()


def format_mps(model) -> str:
    spec = model if isinstance(model, MipSpec) else None
    lp = spec.lp if spec is not None else model
    ints = spec.integers if spec is not None else frozenset()
    cols = [[] for _ in range(lp.n_vars)]
    for i, (coefs, _, _) in enumerate(lp.rows):
        for j, a in sorted(coefs.items()):
            if a != 0.0:
                cols[j].append((lp.row_names[i], a))
    out = [f"NAME          {lp.name}"]
    if lp.sense == "max":
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(_field("N", "obj"))
    for (_, sense, _), name in zip(lp.rows, lp.row_names):
        out.append(_field(_SENSE_CODE[sense], name))
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for j in range(lp.n_vars):
        is_int = j in ints
        if is_int != in_int:
            tag = "'INTORG'" if is_int else "'INTEND'"
            out.append(f"    MARKER{marker:<6}  'MARKER'                 {tag}")
            marker += 1
            in_int = is_int
        name = lp.var_names[j]
        entries = ([("obj", lp.obj[j])] if lp.obj[j] != 0.0 else []) + cols[j]
        if not entries:
            entries = [("obj", 0.0)]
        for row, a in entries:
            out.append(f"    {name:<8}  {row:<8}  {_num(a):>12}")
    if in_int:
        out.append(f"    MARKER{marker:<6}  'MARKER'                 'INTEND'")
    out.append("RHS")
    for (_, _, rhs), name in zip(lp.rows, lp.row_names):
        if rhs != 0.0:
            out.append(f"    RHS       {name:<8}  {_num(rhs):>12}")
    out.append("BOUNDS")
    for j in range(lp.n_vars):
        name, lo, hi = lp.var_names[j], lp.lo[j], lp.hi[j]
        if j in ints and lo == 0.0 and hi == 1.0:
            out.append(f" BV BND       {name}")
            continue
        if lo == hi:
            out.append(f" FX BND       {name:<8}  {_num(lo):>12}")
            continue
        if lo == -math.inf and hi == math.inf:
            out.append(f" FR BND       {name}")
            continue
        if lo == -math.inf:
            out.append(f" MI BND       {name}")
        elif lo != 0.0:
            out.append(f" LO BND       {name:<8}  {_num(lo):>12}")
        if hi != math.inf:
            out.append(f" UP BND       {name:<8}  {_num(hi):>12}")
        elif j in ints:
            out.append(f" PL BND       {name}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export_mps(model, path):
    Path(path).write_text(format_mps(model), encoding="utf-8")


def parse_mps(text: str) -> MipSpec:
    """Read back what ``format_mps`` writes (whitespace-separated fields)."""
    lp = LinearProgram()
    section = None
    row_index, var_index = {}, {}
    senses = {}
    ints = set()
    in_int = False
    rhs = {}
    explicit_bounds = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0]
            if section == "NAME":
                lp.name = tok[1] if len(tok) > 1 else "lp"
            continue
        if section == "OBJSENSE":
            lp.sense = "max" if tok[0].upper() == "MAX" else "min"
        elif section == "ROWS":
            code, name = tok
            if code == "N":
                row_index[name] = None
                continue
            if code not in _CODE_SENSE:
                raise ParseError(f"unknown row type {code}", lineno)
            row_index[name] = len(senses)
            senses[name] = _CODE_SENSE[code]
            lp.rows.append(({}, _CODE_SENSE[code], 0.0))
            lp.row_names.append(name)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            name = tok[0]
            if name not in var_index:
                var_index[name] = lp.add_var(0.0, math.inf, 0.0, name)
                if in_int:
                    ints.add(var_index[name])
            j = var_index[name]
            for row, val in zip(tok[1::2], tok[2::2]):
                if row not in row_index:
                    raise ParseError(f"unknown row {row}", lineno)
                i = row_index[row]
                if i is None:
                    lp.obj[j] = float(val)
                else:
                    lp.rows[i][0][j] = float(val)
        elif section == "RHS":
            for row, val in zip(tok[1::2], tok[2::2]):
                rhs[row] = float(val)
        elif section == "BOUNDS":
            code, name = tok[0], tok[2]
            if name not in var_index:
                raise ParseError(f"bound on unknown column {name}", lineno)
            j = var_index[name]
            val = float(tok[3]) if len(tok) > 3 else None
            explicit_bounds.setdefault(j, []).append((code, val))
        elif section != "ENDATA":
            raise ParseError(f"unexpected data in section {section}", lineno)
    for row, val in rhs.items():
        i = row_index[row]
        coefs, sense, _ = lp.rows[i]
        lp.rows[i] = (coefs, sense, val)
    for j, items in explicit_bounds.items():
        for code, val in items:
            if code == "UP":
                lp.hi[j] = val
            elif code == "LO":
                lp.lo[j] = val
            elif code == "FX":
                lp.lo[j] = lp.hi[j] = val
            elif code == "FR":
                lp.lo[j], lp.hi[j] = -math.inf, math.inf
            elif code == "MI":
                lp.lo[j] = -math.inf
            elif code == "PL":
                lp.hi[j] = math.inf
            elif code == "BV":
                lp.lo[j], lp.hi[j] = 0.0, 1.0
    return MipSpec(lp, ints)


def import_mps(path) -> MipSpec:
    return parse_mps(Path(path).read_text(encoding="utf-8"))


def format_lp_text(model) -> str:
    """Human-readable algebraic dump."""
    spec = model if isinstance(model, MipSpec) else None
    lp = spec.lp if spec is not None else model
    names = lp.var_names

    def expr(coefs):
        terms = [f"{'-' if a < 0 else '+'} {_num(abs(a))} {names[j]}" for j, a in sorted(coefs.items()) if a]
        s = " ".join(terms) or "0"
        return s[2:] if s.startswith("+ ") else s

    out = ["Minimize" if lp.sense == "min" else "Maximize"]
    out.append(" obj: " + expr(dict(enumerate(lp.obj))))
    out.append("Subject To")
    for (coefs, sense, rhs), name in zip(lp.rows, lp.row_names):
        out.append(f" {name}: {expr(coefs)} {sense} {_num(rhs)}")
    out.append("Bounds")
    for j, name in enumerate(names):
        out.append(f" {_num(lp.lo[j])} <= {name} <= {_num(lp.hi[j])}")
    if spec is not None and spec.integers:
        out.append("Integers")
        out.append(" " + " ".join(names[j] for j in sorted(spec.integers)))
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp_text(model, path):
    Path(path).write_text(format_lp_text(model), encoding="utf-8")
