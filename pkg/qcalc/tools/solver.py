"""
Equation solving tools for the qcalc MCP server.
"""

from typing import Optional

from pydantic import ValidationError

from qcalc.config import load_settings
from qcalc.errors import NotContracting, QCalcError
from qcalc.expr import spec_from_text
from qcalc.ivp import solve_second_order_linear, solver_window
from qcalc.qsymbols import QContext
from qcalc.report import SOLVE_COLUMNS, WRONSKIAN_COLUMNS, solution_rows, wronskian_rows, write_rows
from qcalc.wronskian import is_fundamental


def solve_ivp_text(
    q: float,
    a0: str = "1",
    a1: str = "0",
    a2: str = "0",
    b: str = "0",
    b1: str = "1",
    b2: str = "0",
    kmin: Optional[int] = None,
    kmax: Optional[int] = None,
    tol: float = 1e-8,
    fmt: str = "csv",
) -> str:
    settings = load_settings()
    ctx = QContext.from_settings(q, settings)
    lat = solver_window(ctx, kmin, kmax)
    spec = spec_from_text(lat, a0, a1, a2, b, complex(b1), complex(b2))
    _, _, combined = solve_second_order_linear(spec, settings=settings)
    text = write_rows(solution_rows(combined), SOLVE_COLUMNS, fmt)
    if combined.residual > tol:
        return f"Warning: residual {combined.residual:.3g} exceeds tolerance {tol:.3g}\n{text}"
    return text


def wronskian_text(
    q: float,
    a0: str = "1",
    a1: str = "0",
    a2: str = "0",
    kmin: Optional[int] = None,
    kmax: Optional[int] = None,
    fmt: str = "csv",
) -> str:
    settings = load_settings()
    ctx = QContext.from_settings(q, settings)
    lat = solver_window(ctx, kmin, kmax)
    spec = spec_from_text(lat, a0, a1, a2, "0", 1.0, 1.0)
    even, odd, _ = solve_second_order_linear(spec, settings=settings)
    header = f"fundamental: {is_fundamental(even.y, odd.y)}\n"
    return header + write_rows(wronskian_rows(spec, even.y, odd.y), WRONSKIAN_COLUMNS, fmt)


def register_tools(mcp):
    """Register equation solving tools with the MCP server."""

    @mcp.tool()
    def solve_linear_ivp(
        q: float,
        a0: str = "1",
        a1: str = "0",
        a2: str = "0",
        b: str = "0",
        b1: str = "1",
        b2: str = "0",
        kmin: Optional[int] = None,
        kmax: Optional[int] = None,
        tol: float = 1e-8,
        fmt: str = "csv",
    ) -> str:
        """
        Solve q a0 ∂²y(qx) + a1 ∂y(x) + a2 y = b for the odd part of y and
        q a0 ∂²y(qx) + q a1 ∂y(qx) + a2 y = b for the even part, with
        y(0) = b1 and ∂y(0) = b2, where ∂ is Rubin's q-derivative.
        Coefficients are polynomial expressions in x and q such as "1",
        "-(1-q)*x" or "x^2+1"; b1 and b2 may be complex ("1+2j"). Returns
        one row per lattice point with y, ∂y and the pointwise residual.
        """
        try:
            return solve_ivp_text(q, a0, a1, a2, b, b1, b2, kmin, kmax, tol, fmt)
        except NotContracting as e:
            return f"Error: not contracting: {str(e)}"
        except (QCalcError, ValidationError, ValueError) as e:
            return f"Error: {str(e)}"

    @mcp.tool()
    def wronskian_table(
        q: float,
        a0: str = "1",
        a1: str = "0",
        a2: str = "0",
        kmin: Optional[int] = None,
        kmax: Optional[int] = None,
        fmt: str = "csv",
    ) -> str:
        """
        Compute the q-Wronskian of the even/odd fundamental pair of the
        homogeneous equation (q a0 ∂²y(qx) + a1 ∂y(x) + a2 y = 0 for odd y,
        q a1 ∂y(qx) in place of a1 ∂y(x) for even y), with the Abel and
        Liouville residuals at each point.
        """
        try:
            return wronskian_text(q, a0, a1, a2, kmin, kmax, fmt)
        except NotContracting as e:
            return f"Error: not contracting: {str(e)}"
        except (QCalcError, ValidationError, ValueError) as e:
            return f"Error: {str(e)}"
