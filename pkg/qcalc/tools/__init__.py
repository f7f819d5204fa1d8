"""
MCP tool modules for the qcalc server. Each module exposes register_tools(mcp).
"""
