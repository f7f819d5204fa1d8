#!/usr/bin/env python3
"""
Quick check that every qcalc module imports and the MCP server initializes.
"""

import importlib
import os
import sys
import traceback

MODULES = [
    "qcalc.cli",
    "qcalc.mcp_server",
    "qcalc.mcp_implementation",
    "qcalc.tools.tables",
    "qcalc.tools.solver",
    "qcalc.tools.verification",
]


def test_import_modules():
    """Test importing all required modules."""
    for module_name in MODULES:
        print(f"Testing import of {module_name}...")
        importlib.import_module(module_name)
        print(f"✅ Successfully imported {module_name}")


def test_mcp_initialization():
    """Test MCP server initialization."""
    from qcalc.mcp_implementation import mcp

    print(f"✅ Successfully initialized MCP server: {mcp}")
    assert mcp.name == "qcalc"


if __name__ == "__main__":
    sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
    try:
        test_import_modules()
        test_mcp_initialization()
    except Exception as e:
        print(f"❌ Startup check failed: {e}")
        traceback.print_exc()
        sys.exit(1)
    print("✅ All tests passed! The MCP server should start correctly.")
