"""
Invariant suite tool for the qcalc MCP server.
"""

from pydantic import ValidationError

from qcalc.config import load_settings
from qcalc.errors import QCalcError
from qcalc.qsymbols import QContext
from qcalc.verify import run_suite


def register_tools(mcp):
    """Register verification tools with the MCP server."""

    @mcp.tool()
    def run_invariant_suite(q: float, suite: str = "all") -> str:
        """
        Run an invariant suite (symbols, ops, int, fun, ivp, wronskian,
        constcoef or all) for the given q. Returns one PASS/FAIL line per
        check followed by a summary.
        """
        try:
            settings = load_settings()
            ctx = QContext.from_settings(q, settings)
            results = run_suite(suite, ctx, settings)
        except (QCalcError, ValidationError, ValueError) as e:
            return f"Error: {str(e)}"

        lines = []
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            line = f"{status} {r.name}: residual {r.max_residual:.3e} (tol {r.tolerance:.3e})"
            if r.detail and not r.passed:
                line += f" - {r.detail}"
            lines.append(line)
        passed = sum(r.passed for r in results)
        lines.append(f"{passed}/{len(results)} checks passed")
        return "\n".join(lines)
