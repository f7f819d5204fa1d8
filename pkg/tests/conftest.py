"""
Shared fixtures: a q = 1/2 context, default settings and a few windows.
"""

import pytest

from qcalc.config import SERIES_TOL_ENV, Settings
from qcalc.lattice import build_lattice, tail_depth
from qcalc.qsymbols import QContext


@pytest.fixture(autouse=True)
def _no_series_tol_override(monkeypatch):
    monkeypatch.delenv(SERIES_TOL_ENV, raising=False)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def ctx():
    return QContext(q=0.5)


@pytest.fixture
def shallow(ctx):
    """|x| from 8 down to q^10."""
    return build_lattice(ctx, -3, 10)


@pytest.fixture
def deep(ctx):
    """|x| from 1 down past the Jackson tail depth."""
    return build_lattice(ctx, 0, tail_depth(ctx, 10) + 2)
