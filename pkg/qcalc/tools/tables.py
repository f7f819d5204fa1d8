"""
Tabulation tools for the qcalc MCP server: q-trigonometric functions and
q-symbols on the lattice.
"""

import csv
import io

from pydantic import ValidationError

from qcalc.config import load_settings
from qcalc.errors import QCalcError
from qcalc.lattice import build_lattice
from qcalc.qsymbols import QContext, q_bracket, q_factorial, q_pochhammer
from qcalc.report import parse_funcs, table_columns, table_rows, write_rows


def function_table(q: float, kmin: int = 0, kmax: int = 10, funcs: str = "cos,sin,exp", fmt: str = "csv") -> str:
    ctx = QContext.from_settings(q, load_settings())
    names = parse_funcs(funcs)
    lat = build_lattice(ctx, kmin, kmax)
    return write_rows(table_rows(lat, names), table_columns(names), fmt)


def symbols_table(q: float, n_max: int = 10) -> str:
    ctx = QContext.from_settings(q, load_settings())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["n", "bracket", "factorial", "pochhammer"])
    for n in range(n_max + 1):
        writer.writerow([
            n,
            format(q_bracket(n, ctx), ".17g"),
            format(q_factorial(n, ctx), ".17g"),
            format(q_pochhammer(ctx.q, n, ctx).real, ".17g"),
        ])
    return buffer.getvalue()


def register_tools(mcp):
    """Register tabulation tools with the MCP server."""

    @mcp.tool()
    def q_function_table(q: float, kmin: int = 0, kmax: int = 10, funcs: str = "cos,sin,exp", fmt: str = "csv") -> str:
        """
        Tabulate cos(x, q^2), sin(x, q^2) and e(x, q^2) on the points ±q^k,
        kmin <= k <= kmax, and at 0. funcs is a comma separated subset of
        cos,sin,exp; fmt is csv or json.
        """
        try:
            return function_table(q, kmin, kmax, funcs, fmt)
        except (QCalcError, ValidationError, ValueError) as e:
            return f"Error: {str(e)}"

    @mcp.tool()
    def q_symbols(q: float, n_max: int = 10) -> str:
        """
        List [n]_q, [n]_q! and (q; q)_n for n = 0..n_max as CSV.
        """
        try:
            if n_max < 0:
                return f"Error: n_max must be nonnegative, got {n_max}"
            return symbols_table(q, n_max)
        except (QCalcError, ValidationError, ValueError) as e:
            return f"Error: {str(e)}"
