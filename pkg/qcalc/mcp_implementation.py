"""
qcalc MCP implementation using the official MCP SDK.
This file holds the FastMCP instance with every tool module registered.
"""

import sys

from mcp.server.fastmcp import FastMCP

from qcalc.tools.solver import register_tools as register_solver_tools
from qcalc.tools.tables import register_tools as register_table_tools
from qcalc.tools.verification import register_tools as register_verification_tools

mcp = FastMCP("qcalc")

register_table_tools(mcp)
register_solver_tools(mcp)
register_verification_tools(mcp)

print("qcalc MCP Server initialized", file=sys.stderr)
