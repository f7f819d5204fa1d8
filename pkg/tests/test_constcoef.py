import numpy as np
import pytest

from qcalc.constcoef import (
    closed_form_coefficient,
    closed_form_pair,
    constcoef_spec,
    default_num_coeffs,
    rewritten_form_residual,
    series_solution,
    wq_constcoef,
)
from qcalc.errors import DomainError, ParityError
from qcalc.lattice import Parity, build_lattice, sample
from qcalc.qfun import q_cos, q_sin
from qcalc.qsymbols import QContext
from qcalc.wronskian import abel_E


class TestSeriesSolution:
    @pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
    @pytest.mark.parametrize("a, b", [(1.0, 1.0), (0.5, 1.0), (2.0, -0.5)])
    @pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
    def test_recurrence_matches_closed_form(self, q, a, b, parity):
        ctx = QContext(q=q)
        series = series_solution(a, b, parity, ctx, num_coeffs=13)
        offset = 0 if parity == Parity.EVEN else 1
        for p in range(13):
            expected = closed_form_coefficient(a, b, parity, p, ctx)
            assert series.coefficients[2 * p + offset] == pytest.approx(expected, rel=1e-12)

    def test_only_one_parity_present(self, ctx):
        series = series_solution(1.0, 1.0, Parity.ODD, ctx, num_coeffs=6)
        assert np.all(series.coefficients[0::2] == 0)

    @pytest.mark.parametrize("x", [0.2, 0.9, -1.5])
    def test_sums_to_trig_functions(self, ctx, x):
        cos = series_solution(1.0, 1.0, Parity.EVEN, ctx, radius=2.0)
        sin = series_solution(1.0, 1.0, Parity.ODD, ctx, radius=2.0)
        assert cos(x, ctx) == pytest.approx(q_cos(x, ctx), rel=1e-12, abs=1e-14)
        assert sin(x, ctx) == pytest.approx(q_sin(x, ctx), rel=1e-12, abs=1e-14)

    def test_default_length(self, ctx):
        n = default_num_coeffs(1.0, 1.0, ctx)
        assert 2 <= n < ctx.max_terms

    def test_general_parity(self, ctx):
        with pytest.raises(ParityError):
            series_solution(1.0, 1.0, Parity.GENERAL, ctx)

    def test_zero_leading_coefficient(self, ctx):
        with pytest.raises(DomainError):
            series_solution(0.0, 1.0, Parity.EVEN, ctx)


class TestClosedForm:
    def test_initial_values(self, ctx):
        y1, y2 = closed_form_pair(1.0, 4.0, ctx)
        assert y1(0.0) == 1
        assert y2(0.0) == 0

    def test_scaled_argument(self, ctx):
        y1, y2 = closed_form_pair(1.0, 4.0, ctx)
        assert y1(0.3) == pytest.approx(q_cos(0.6, ctx))
        assert y2(0.3) == pytest.approx(q_sin(0.6, ctx) / 2)

    def test_zero_b(self, ctx):
        with pytest.raises(DomainError):
            closed_form_pair(1.0, 0.0, ctx)

    def test_wronskian_at_zero(self, ctx):
        assert wq_constcoef(1.0, 3.0, 0.0, ctx) == 1

    def test_wronskian_tends_to_one(self):
        far = abs(wq_constcoef(1.0, 1.0, 0.5, QContext(q=0.9)) - 1)
        near = abs(wq_constcoef(1.0, 1.0, 0.5, QContext(q=0.99)) - 1)
        assert near < far

    def test_spec_has_no_abel_term(self, ctx):
        lat = build_lattice(ctx, 0, 10)
        spec = constcoef_spec(1.0, 2.0, lat, b2=1.0)
        assert spec.b1 == 1 and spec.b2 == 1
        assert np.max(np.abs(abel_E(spec, lat.points))) < 1e-15


class TestRewrittenForm:
    @pytest.mark.parametrize("func, parity", [(q_sin, Parity.ODD), (q_cos, Parity.EVEN)])
    def test_trig_functions_satisfy_it(self, ctx, func, parity):
        lat = build_lattice(ctx, -2, 12)
        y = sample(lambda x: func(x, ctx), lat, parity)
        assert rewritten_form_residual(1.0, 1.0, y, floor=1e-2) < 1e-8

    def test_needs_parity(self, ctx):
        lat = build_lattice(ctx, 0, 8)
        with pytest.raises(ParityError):
            rewritten_form_residual(1.0, 1.0, sample(lambda x: 1 + x, lat))
