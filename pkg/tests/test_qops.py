import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from qcalc.errors import DomainError, ParityError
from qcalc.lattice import Parity, build_lattice, sample, shift_power
from qcalc.qops import (
    jackson_derivative,
    jackson_dq,
    jackson_dq_n,
    jackson_dq_zero,
    rubin_derivative,
    rubin_dq,
    rubin_dq_n,
    rubin_dq_zero,
    rubin_parity_form,
    rubin_product,
    rubin_via_parity,
)
from qcalc.qsymbols import QContext, q_bracket


def _interior(lat, margin=1):
    for sign in (1, -1):
        for k in range(lat.k_min + margin, lat.k_max - margin + 1):
            yield lat.point(sign, k)


def _monomial_factor(m, ctx):
    factor = q_bracket(m, ctx)
    return factor * ctx.q ** (-m) if m % 2 == 0 else factor


class TestRubinOnMonomials:
    @pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
    @pytest.mark.parametrize("m", range(9))
    def test_five_point_formula(self, q, m):
        ctx = QContext(q=q)
        lat = build_lattice(ctx, -6, 10)
        f = sample(lambda x: x ** m, lat)
        c = _monomial_factor(m, ctx)
        for x in _interior(lat):
            expected = c * x ** (m - 1) if m else 0.0
            assert rubin_dq(f, x) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("m", range(6))
    def test_parity_form_agrees(self, shallow, m):
        f = sample(lambda x: x ** m + 0.5 * x, shallow)
        for x in _interior(shallow):
            assert rubin_parity_form(f, x) == pytest.approx(rubin_dq(f, x), rel=1e-12, abs=1e-12)

    def test_whole_lattice_matches_pointwise(self, shallow):
        f = sample(lambda x: 1 + x - x ** 2 + x ** 3, shallow)
        d = rubin_derivative(f)
        for x in _interior(shallow):
            assert d(x) == pytest.approx(rubin_dq(f, x), rel=1e-14)
        assert d.missing[shallow.position(1, shallow.k_min)]
        assert d.missing[shallow.position(-1, shallow.k_max)]

    def test_parity_flips(self, shallow):
        f = sample(lambda x: x ** 2, shallow, Parity.EVEN)
        assert rubin_derivative(f).parity == Parity.ODD

    def test_value_at_zero_is_sample_or_limit(self, shallow):
        f = sample(lambda x: 1 + x + x * x, shallow)
        assert f.value_at_zero == 1
        d = rubin_derivative(f)
        assert d.value_at_zero == pytest.approx(1.0, abs=1e-6)
        assert d.value_at_zero == pytest.approx(rubin_dq_zero(f, 0.5), abs=1e-6)
        assert rubin_derivative(sample(lambda x: x * x, shallow, Parity.EVEN)).value_at_zero == 0

    def test_zero_needs_limit_form(self, shallow):
        f = sample(lambda x: x, shallow)
        with pytest.raises(DomainError):
            rubin_dq(f, 0.0)


class TestJackson:
    @pytest.mark.parametrize("m", range(7))
    def test_monomials(self, shallow, m):
        ctx = shallow.ctx
        f = sample(lambda x: x ** m, shallow)
        for x in _interior(shallow):
            expected = q_bracket(m, ctx) * x ** (m - 1) if m else 0.0
            assert jackson_dq(f, x) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_iterates_on_quintic(self, shallow, n):
        ctx = shallow.ctx
        f = sample(lambda x: x ** 5, shallow)
        coefficient = np.prod([q_bracket(5 - j, ctx) for j in range(n)])
        x = shallow.point(1, 1)
        assert jackson_dq_n(f, x, n) == pytest.approx(coefficient * x ** (5 - n), rel=1e-10)

    def test_whole_lattice(self, shallow):
        f = sample(lambda x: x ** 3 - x, shallow)
        d = jackson_derivative(f)
        x = shallow.point(-1, 2)
        assert d(x) == pytest.approx(jackson_dq(f, x), rel=1e-14)

    def test_limit_at_zero(self, ctx):
        lat = build_lattice(ctx, 0, 12)
        f = sample(lambda x: 3 + 2 * x + x ** 2, lat)
        assert jackson_dq_zero(f, 1.0) == pytest.approx(2, abs=1e-9)

    def test_negative_order(self, shallow):
        with pytest.raises(DomainError):
            jackson_dq_n(sample(lambda x: x, shallow), 0.5, -1)


class TestRubinIterates:
    def test_limit_at_zero(self, ctx):
        lat = build_lattice(ctx, 0, 16)
        f = sample(lambda x: x + x ** 2, lat)
        assert rubin_dq_zero(f, 1.0) == pytest.approx(1, abs=1e-9)

    def test_second_derivative_of_quartic(self, shallow):
        ctx = shallow.ctx
        f = sample(lambda x: x ** 4, shallow, Parity.EVEN)
        c = _monomial_factor(4, ctx) * _monomial_factor(3, ctx)
        x = shallow.point(1, 2)
        assert rubin_dq_n(f, x, 2) == pytest.approx(c * x ** 2, rel=1e-12)

    @hsettings(max_examples=25, deadline=None)
    @given(coeffs=st.lists(st.floats(min_value=-1, max_value=1), min_size=9, max_size=9), n=st.integers(1, 3))
    def test_parity_route_agrees(self, coeffs, n):
        lat = build_lattice(QContext(q=0.5), -5, 7)
        f = sample(lambda x: sum(c * x ** j for j, c in enumerate(coeffs)), lat)
        x = lat.point(1, 1)
        direct = rubin_dq_n(f, x, n)
        via = rubin_via_parity(f, x, n)
        assert abs(direct - via) <= 1e-9 * max(1.0, abs(direct))


class TestProductRule:
    @pytest.mark.parametrize(
        "f, fp, g, gp",
        [
            (lambda x: 1 + x ** 2, Parity.EVEN, lambda x: x ** 3, Parity.ODD),
            (lambda x: x ** 3, Parity.ODD, lambda x: 2 - x ** 2, Parity.EVEN),
            (lambda x: 1 + x ** 2, Parity.EVEN, lambda x: x ** 4, Parity.EVEN),
            (lambda x: x, Parity.ODD, lambda x: x ** 3 - x, Parity.ODD),
        ],
    )
    def test_matches_direct_derivative(self, ctx, f, fp, g, gp):
        lat = build_lattice(ctx, -4, 8)
        F, G = sample(f, lat, fp), sample(g, lat, gp)
        for k in range(-2, 6):
            x = lat.point(1, k)
            direct = rubin_dq(F * G, x)
            assert rubin_product(F, G, x) == pytest.approx(direct, rel=1e-10, abs=1e-10)

    def test_general_parity_rejected(self, shallow):
        f = sample(lambda x: 1 + x, shallow)
        with pytest.raises(ParityError):
            rubin_product(f, f, 0.5)


class TestCommutation:
    @pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
    @pytest.mark.parametrize("n", [1, -1])
    def test_dilation_commutes_up_to_q(self, q, n):
        ctx = QContext(q=q)
        lat = build_lattice(ctx, -6, 10)
        f = sample(lambda x: 1 - 2 * x + 0.5 * x ** 3 + x ** 4 - 0.25 * x ** 7, lat)
        lhs = rubin_derivative(shift_power(f, n))
        rhs = q ** n * shift_power(rubin_derivative(f), n)
        for x in _interior(lat, margin=2):
            assert lhs(x) == pytest.approx(rhs(x), rel=1e-12)
