"""
The MCP tools are exercised through register_tools with a recording stand-in
for the FastMCP instance.
"""

import pytest

from qcalc.tools import solver, tables, verification


class RecordingMCP:
    def __init__(self):
        self.tools = {}

    def tool(self):
        def decorator(func):
            self.tools[func.__name__] = func
            return func

        return decorator


@pytest.fixture
def tools(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    mcp = RecordingMCP()
    for module in (tables, solver, verification):
        module.register_tools(mcp)
    return mcp.tools


def test_registered_names(tools):
    assert set(tools) == {
        "q_function_table",
        "q_symbols",
        "solve_linear_ivp",
        "wronskian_table",
        "run_invariant_suite",
    }


class TestTableTools:
    def test_symbols(self, tools):
        lines = tools["q_symbols"](0.5, 3).strip().split("\n")
        assert lines[0] == "n,bracket,factorial,pochhammer"
        assert lines[3] == "2,1.5,1.5,0.375"
        assert len(lines) == 5

    def test_negative_count(self, tools):
        assert tools["q_symbols"](0.5, -1).startswith("Error:")

    def test_function_table(self, tools):
        text = tools["q_function_table"](0.5, 0, 4, "cos")
        assert text.split("\n")[0] == "x,q_cos"
        assert len(text.strip().split("\n")) == 12

    def test_q_out_of_range(self, tools):
        assert tools["q_function_table"](1.5).startswith("Error:")


class TestSolverTools:
    def test_zero_data(self, tools):
        text = tools["solve_linear_ivp"](0.5, a2="1", b1="0", b2="0")
        assert text.startswith("k,x,re(y)")

    def test_bad_coefficient(self, tools):
        assert tools["solve_linear_ivp"](0.5, a0="0").startswith("Error:")

    def test_wronskian(self, tools):
        text = tools["wronskian_table"](0.5, a0="1/q", a1="-(1-q)*x", a2="1")
        assert text.startswith("fundamental: True\nx,re(W)")


class TestVerificationTool:
    def test_symbols(self, tools):
        lines = tools["run_invariant_suite"](0.5, "symbols").split("\n")
        assert all(line.startswith("PASS") for line in lines[:-1])
        assert lines[-1].endswith("checks passed")

    def test_unknown_suite(self, tools):
        assert tools["run_invariant_suite"](0.5, "bogus").startswith("Error:")
