#!/usr/bin/env python3
"""
qcalc MCP server entry point. Serves the q-calculus tools over stdio.
"""

import sys
import traceback

try:
    from mcp.server.fastmcp import FastMCP  # noqa: F401
except ImportError:
    print("Error: MCP SDK not found. Please install it with: pip install mcp", file=sys.stderr)
    sys.exit(1)

from qcalc.config import CONFIG_FILE, load_settings
from qcalc.logging_setup import setup_logging
from qcalc.version import VERSION

try:
    from qcalc.mcp_implementation import mcp
except ImportError as e:
    print(f"Error importing MCP implementation: {e}", file=sys.stderr)
    traceback.print_exc(file=sys.stderr)
    sys.exit(1)


def main():
    """Main entry point for the MCP server."""
    try:
        settings = load_settings()
        print(f"qcalc {VERSION} MCP server on {sys.executable}", file=sys.stderr)
        print(f"settings: {CONFIG_FILE} (series_tol={settings.series_tol:g})", file=sys.stderr)
        setup_logging(settings.log_level)

        print("Available tool categories:", file=sys.stderr)
        print("- Table tools: q_function_table, q_symbols", file=sys.stderr)
        print("- Solver tools: solve_linear_ivp, wronskian_table", file=sys.stderr)
        print("- Verification tools: run_invariant_suite", file=sys.stderr)

        mcp.run()
    except Exception as e:
        print(f"Fatal error: {str(e)}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
