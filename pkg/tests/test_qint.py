import numpy as np
import pytest

from qcalc.errors import DomainError, ParityError, TailNotNegligible
from qcalc.lattice import LatticeFn, Parity, build_lattice, sample, tail_depth
from qcalc.qfun import q_cos, q_sin
from qcalc.qint import (
    Domain,
    ftc_check,
    ibp_residual,
    improper_integral,
    integral_fn,
    integral_to_qx,
    jackson_integral,
    jackson_integral_ab,
)
from qcalc.qops import rubin_derivative
from qcalc.qsymbols import QContext

_CTX = QContext(q=0.5)


class TestJacksonIntegral:
    @pytest.mark.parametrize("x", [1.0, 0.5, -0.25])
    def test_constant(self, deep, x):
        f = sample(lambda t: 1.0, deep, Parity.EVEN)
        assert jackson_integral(f, x) == pytest.approx(x, rel=1e-13)

    def test_linear(self, deep):
        q = deep.q
        f = sample(lambda t: t, deep, Parity.ODD)
        assert jackson_integral(f, 0.5) == pytest.approx(0.25 / (1 + q), rel=1e-13)

    def test_origin(self, deep):
        assert jackson_integral(sample(lambda t: 1.0, deep), 0.0) == 0

    def test_tail_too_large(self, ctx):
        shallow = build_lattice(ctx, 0, 5)
        with pytest.raises(TailNotNegligible) as info:
            jackson_integral(sample(lambda t: 1.0, shallow), 1.0)
        assert info.value.tail == "small-x"

    def test_interval(self, deep):
        f = sample(lambda t: t ** 2, deep)
        ab = jackson_integral_ab(f, 0.25, 1.0)
        assert ab == pytest.approx(jackson_integral(f, 1.0) - jackson_integral(f, 0.25))

    def test_whole_window(self, deep):
        f = sample(lambda t: 1 + t + t ** 3, deep)
        F = integral_fn(f)
        for k in (0, 3, 7):
            for sign in (1, -1):
                x = deep.point(sign, k)
                assert F(x) == pytest.approx(jackson_integral(f, x), rel=1e-13)

    def test_linearity(self, deep):
        f = sample(lambda t: q_cos(t, _CTX), deep, Parity.EVEN)
        g = sample(lambda t: t ** 3 - t, deep, Parity.ODD)
        alpha, beta = 0.7, -1.3 + 0.4j
        h = alpha * f + beta * g
        for x in (1.0, -0.5, 0.125):
            expected = alpha * jackson_integral(f, x) + beta * jackson_integral(g, x)
            assert jackson_integral(h, x) == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_to_qx(self, deep):
        f = sample(lambda t: t ** 2, deep)
        G = integral_to_qx(f)
        x = deep.point(1, 2)
        assert G(x) == pytest.approx(jackson_integral(f, deep.point(1, 3)), rel=1e-13)


class TestImproper:
    @pytest.fixture
    def wide(self, ctx):
        return build_lattice(ctx, -8, 60)

    def test_even_function_halves(self, wide):
        f = sample(lambda t: t * t * np.exp(-t * t), wide, Parity.EVEN)
        pos = improper_integral(f, Domain.POSITIVE_AXIS)
        neg = improper_integral(f, Domain.NEGATIVE_AXIS)
        assert pos == pytest.approx(neg, rel=1e-14)
        assert improper_integral(f) == pytest.approx(pos + neg, rel=1e-14)

    def test_odd_function_cancels(self, wide):
        f = sample(lambda t: t * np.exp(-t * t), wide, Parity.ODD)
        assert abs(improper_integral(f)) < 1e-15

    def test_large_x_tail(self, wide):
        with pytest.raises(TailNotNegligible) as info:
            improper_integral(sample(lambda t: 1.0, wide))
        assert info.value.tail == "large-x"


class TestFundamentalTheorems:
    @pytest.mark.parametrize(
        "f, parity",
        [
            (lambda t: t ** 3, Parity.ODD),
            (lambda t: 1 + t ** 2 - t ** 6, Parity.EVEN),
            (lambda t: q_sin(t, _CTX).real, Parity.ODD),
            (lambda t: q_cos(t, _CTX).real, Parity.EVEN),
        ],
    )
    def test_residuals(self, deep, f, parity):
        fn = sample(f, deep, parity)
        report = ftc_check(fn)
        assert report.parity == parity
        assert report.max_residual < 1e-10 * max(1.0, fn.max_abs())

    def test_general_rejected(self, deep):
        with pytest.raises(ParityError):
            ftc_check(sample(lambda t: 1 + t, deep))


class TestIntegrationByParts:
    @pytest.mark.parametrize(
        "f, g",
        [
            (lambda t: 1 + t + t ** 2, lambda t: t ** 3 + t),
            (lambda t: q_cos(t, _CTX).real, lambda t: q_sin(t, _CTX).real + t ** 2),
        ],
    )
    def test_residual_vanishes(self, deep, f, g):
        F, G = sample(f, deep), sample(g, deep)
        assert abs(ibp_residual(F, G, deep.point(1, 1))) < 1e-10

    def test_endpoint_must_be_positive(self, deep):
        f = sample(lambda t: t, deep)
        with pytest.raises(DomainError):
            ibp_residual(f, f, -0.5)


    def test_whole_line_without_boundary_term(self, ctx):
        lat = build_lattice(ctx, -4, 16)
        rng = np.random.default_rng(7)
        support = np.zeros(lat.rings)
        support[4:15] = 1.0

        def compact():
            return LatticeFn.from_rings(
                lat, support * rng.uniform(-1, 1, lat.rings), support * rng.uniform(-1, 1, lat.rings), 0j
            )

        f, g = compact(), compact()
        lhs = rubin_derivative(f) * g
        rhs = f * rubin_derivative(g)
        scale = improper_integral(lhs.map(np.abs)).real
        assert scale > 0
        assert abs(improper_integral(lhs + rhs)) <= 1e-10 * scale


class TestClassicalLimit:
    @pytest.mark.parametrize(
        "f, exact, max_slope",
        [
            (lambda t: t ** 4, 1 / 5, 4.0),
            (lambda t: (1 + t) ** 4, 31 / 5, 32.0),
            (lambda t: t * t - t, -1 / 6, 1.0),
            (lambda t: 1 + 2 * t - 3 * t ** 3, 5 / 4, 7.0),
        ],
    )
    def test_riemann_integral_near_q_one(self, f, exact, max_slope):
        ctx = QContext(q=0.99)
        lat = build_lattice(ctx, 0, tail_depth(ctx, 16.0) + 1)
        value = jackson_integral(sample(f, lat), 1.0)
        assert abs(value - exact) <= 2 * (1 - ctx.q) * max_slope

    def test_monomial_closed_form(self):
        ctx = QContext(q=0.99)
        lat = build_lattice(ctx, 0, tail_depth(ctx, 1.0) + 1)
        value = jackson_integral(sample(lambda t: t ** 4, lat), 1.0)
        assert value == pytest.approx((1 - ctx.q) / (1 - ctx.q ** 5), rel=1e-11)
