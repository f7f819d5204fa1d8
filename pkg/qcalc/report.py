"""
Row builders and writers for the CSV/JSON tables shared by the command line
and the MCP tools.

Floats are written with 17 significant digits and a lowercase exponent; a
missing value is an empty CSV field and null in JSON.
"""

import csv
import io
import json
import math
from typing import Dict, List, Optional, Sequence, TextIO, Union

import numpy as np

from qcalc.errors import DomainError
from qcalc.ivp import SecondOrderSpec, Solution
from qcalc.lattice import LatticeFn, QLattice
from qcalc.qfun import q_trig
from qcalc.wronskian import abel_residuals, liouville_residuals, wronskian_fn

Cell = Union[int, float, str, None]
Row = Dict[str, Cell]

SOLVE_COLUMNS = ["k", "x", "re(y)", "im(y)", "re(dqy)", "im(dqy)", "residual"]
WRONSKIAN_COLUMNS = ["x", "re(W)", "im(W)", "abel_resid", "liouville_resid"]
TABLE_FUNCS = ("cos", "sin", "exp")


def _num(v: float) -> Optional[float]:
    v = float(v)
    return v if math.isfinite(v) else None


def _points(lat: QLattice):
    """(label, x, index) in ascending x; the origin is labelled "zero"."""
    for i, x in enumerate(lat.points):
        if x == 0:
            yield "zero", 0.0, i
        else:
            sign, k = lat.locate(float(x))
            yield k, float(x), i


def solution_rows(solution: Solution) -> List[Row]:
    """Rows for every point where y is available."""
    y = solution.y
    dy = solution.dy
    residual = solution.pointwise_residual
    rows = []
    for label, x, i in _points(y.lattice):
        v = y.values[i]
        if not np.isfinite(v):
            continue
        d = dy.values[i]
        r = residual.values[i].real if residual is not None else math.nan
        rows.append({
            "k": label,
            "x": x,
            "re(y)": _num(v.real),
            "im(y)": _num(v.imag),
            "re(dqy)": _num(d.real),
            "im(dqy)": _num(d.imag),
            "residual": _num(r),
        })
    return rows


def table_columns(funcs: Sequence[str]) -> List[str]:
    columns = ["x"]
    for name in funcs:
        columns += ["q_exp_re", "q_exp_im"] if name == "exp" else [f"q_{name}"]
    return columns


def parse_funcs(text: str) -> List[str]:
    """Split "cos,sin,exp" and keep the canonical order.

    Raises:
        DomainError: an unknown function name or an empty list.
    """
    names = [t.strip() for t in str(text).split(",") if t.strip()]
    unknown = [n for n in names if n not in TABLE_FUNCS]
    if unknown or not names:
        raise DomainError(f"unknown functions {unknown or names!r}; choose from {', '.join(TABLE_FUNCS)}")
    return [n for n in TABLE_FUNCS if n in names]


def table_rows(lat: QLattice, funcs: Sequence[str]) -> List[Row]:
    """cos(x, q²), sin(x, q²) and e(x, q²) on every lattice point."""
    rows = []
    for _, x, _ in _points(lat):
        c, s, e = q_trig(x, lat.ctx)
        row: Row = {"x": x}
        if "cos" in funcs:
            row["q_cos"] = _num(c.real)
        if "sin" in funcs:
            row["q_sin"] = _num(s.real)
        if "exp" in funcs:
            row["q_exp_re"] = _num(e.real)
            row["q_exp_im"] = _num(e.imag)
        rows.append(row)
    return rows


def wronskian_rows(spec: SecondOrderSpec, y1: LatticeFn, y2: LatticeFn, scale: float = 1.0) -> List[Row]:
    """W_q with its Abel and Liouville residuals wherever W_q is available."""
    w = wronskian_fn(y1, y2)
    abel = abel_residuals(spec, w, scale)
    liouville = liouville_residuals(spec, w, scale)
    rows = []
    for _, x, i in _points(w.lattice):
        v = w.values[i]
        if not np.isfinite(v):
            continue
        rows.append({
            "x": x,
            "re(W)": _num(v.real),
            "im(W)": _num(v.imag),
            "abel_resid": _num(abel.values[i].real),
            "liouville_resid": _num(liouville.values[i].real),
        })
    return rows


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows(rows: List[Row], columns: Sequence[str], fmt: str = "csv", stream: Optional[TextIO] = None) -> str:
    """Render rows as CSV or JSON; also written to stream when given."""
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])
        text = buffer.getvalue()
    elif fmt == "json":
        text = json.dumps([{c: row.get(c) for c in columns} for row in rows], indent=2) + "\n"
    else:
        raise DomainError(f"unknown format {fmt!r}; choose csv or json")
    if stream is not None:
        stream.write(text)
    return text
