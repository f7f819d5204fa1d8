import numpy as np
import pytest

from qcalc.constcoef import constcoef_spec
from qcalc.errors import DomainError, MaxIterations, NotContracting, ParityError
from qcalc.expr import spec_from_text
from qcalc.ivp import (
    FirstOrderProblem,
    RegionSpec,
    characterization_residual,
    contraction_radius,
    estimate_lipschitz,
    picard_step,
    reduce_second_order,
    solve_first_order,
    solve_second_order_linear,
    solver_lattice,
    solver_window,
)
from qcalc.lattice import LatticeFn, Parity, build_lattice, sample
from qcalc.qfun import q_cos, q_exp, q_sin
from qcalc.qops import rubin_derivative


def _problem(f, lat, y0=(1.0,), alpha=1.0):
    return FirstOrderProblem(f=f, region=RegionSpec(alpha=alpha, beta=1.0, rho=0.9, y0=y0), lattice=lat)


def _finite(f):
    ok = np.isfinite(f.values)
    return f.lattice.points[ok], f.values[ok]


class TestContractionRadius:
    def test_minimum_of_three(self):
        region = RegionSpec(alpha=1.0, beta=1.0, rho=0.9, y0=[0])
        assert contraction_radius(2.0, 1.0, region) == pytest.approx(1 / 3)

    def test_alpha_bound(self):
        region = RegionSpec(alpha=0.1, beta=1.0, rho=0.9, y0=[0])
        assert contraction_radius(1.0, 0.0, region) == 0.1

    def test_nonpositive_lipschitz(self):
        region = RegionSpec(alpha=1.0, beta=1.0, rho=0.9, y0=[0])
        with pytest.raises(DomainError):
            contraction_radius(0.0, 1.0, region)

    def test_linear_rhs_estimate(self):
        region = RegionSpec(alpha=1.0, beta=1.0, rho=0.9, y0=[1.0])
        L, M = estimate_lipschitz(lambda x, Y: 3 * Y, region, samples=64)
        assert L == pytest.approx(3, rel=1e-12)
        assert M <= 3 * 2 + 1e-12


class TestPicard:
    def test_single_step(self, ctx):
        lat = solver_lattice(ctx)
        one = LatticeFn(lattice=lat, values=np.ones(len(lat)))
        (y,) = picard_step(lambda x, Y: Y, (one,), (1.0,))
        np.testing.assert_allclose(y.values, 1 + lat.points, atol=1e-13)

    def test_zero_rhs_keeps_initial_value(self, ctx, settings):
        sol = solve_first_order(_problem(lambda x, Y: 0 * Y, solver_lattice(ctx), y0=(2.0,)), settings=settings)
        _, values = _finite(sol.y)
        np.testing.assert_allclose(values, 2.0)
        assert sol.residual == 0

    def test_constant_rhs(self, ctx, settings):
        sol = solve_first_order(_problem(lambda x, Y: np.ones_like(Y), solver_lattice(ctx), y0=(0.0,)), settings=settings)
        x, values = _finite(sol.y)
        np.testing.assert_allclose(values, x, atol=1e-13)

    def test_monomial_rhs(self, ctx, settings):
        q = ctx.q
        sol = solve_first_order(_problem(lambda x, Y: x + 0 * Y, solver_lattice(ctx), y0=(0.0,)), settings=settings)
        x, values = _finite(sol.y)
        np.testing.assert_allclose(values, q * q * x * x / (1 + q), atol=1e-13)

    def test_exponential(self, ctx, settings):
        sol = solve_first_order(_problem(lambda x, Y: Y, solver_lattice(ctx)), settings=settings)
        x, values = _finite(sol.y)
        expected = np.array([q_exp(v, ctx) for v in x])
        np.testing.assert_allclose(values, expected, atol=1e-10)
        assert sol.h_used <= 0.5
        assert sol.certified(settings.rho)
        assert sol.characterization < 1e-10

    def test_characterization_of_exact_solution(self, ctx, settings):
        sol = solve_first_order(_problem(lambda x, Y: Y, solver_lattice(ctx)), settings=settings)
        assert characterization_residual(lambda x, Y: Y, sol.components, (1.0,)) == pytest.approx(sol.characterization)

    def test_max_iterations(self, ctx, settings):
        with pytest.raises(MaxIterations):
            solve_first_order(_problem(lambda x, Y: Y, solver_lattice(ctx)), max_iter=1, settings=settings)

    def test_not_contracting(self, ctx, settings):
        with pytest.raises(NotContracting):
            solve_first_order(_problem(lambda x, Y: 1e20 * Y, solver_lattice(ctx)), settings=settings)

    def test_first_order_has_no_derivative_component(self, ctx, settings):
        sol = solve_first_order(_problem(lambda x, Y: 0 * Y, solver_lattice(ctx)), settings=settings)
        with pytest.raises(DomainError):
            sol.dy


class TestSecondOrder:
    def test_trigonometric_pair(self, ctx, settings):
        spec = constcoef_spec(1.0, 1.0, solver_lattice(ctx), b1=1.0, b2=1.0)
        even, odd, combined = solve_second_order_linear(spec, settings=settings)
        x, values = _finite(even.y)
        np.testing.assert_allclose(values, [q_cos(v, ctx) for v in x], atol=1e-8)
        x, values = _finite(odd.y)
        np.testing.assert_allclose(values, [q_sin(v, ctx) for v in x], atol=1e-8)
        assert even.certified(settings.rho) and odd.certified(settings.rho)
        assert combined.residual == pytest.approx(even.residual + odd.residual)
        assert combined.residual < 1e-8

    def test_zero_data(self, ctx, settings):
        spec = spec_from_text(solver_lattice(ctx), a0="1", a2="1", b1=0, b2=0)
        _, _, combined = solve_second_order_linear(spec, settings=settings)
        _, values = _finite(combined.y)
        assert np.all(values == 0)

    def test_branch_selection(self, ctx, settings):
        spec = spec_from_text(solver_lattice(ctx), a2="1", b1=0, b2=1)
        problem = reduce_second_order(spec, settings=settings)
        assert problem.parity == (Parity.ODD, Parity.EVEN)
        np.testing.assert_array_equal(problem.y0, [0, 1])

    def test_mixed_data_needs_branch(self, ctx, settings):
        spec = spec_from_text(solver_lattice(ctx), a2="1", b1=1, b2=1)
        with pytest.raises(ParityError):
            reduce_second_order(spec, settings=settings)

    def test_vanishing_leading_coefficient(self, ctx, settings):
        spec = spec_from_text(solver_lattice(ctx), a0="x", a2="1")
        with pytest.raises(DomainError, match="a0 vanishes"):
            solve_second_order_linear(spec, settings=settings)

    @pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
    def test_branch_equation_holds_for_closed_form(self, ctx, parity):
        lat = build_lattice(ctx, -3, 10)
        spec = constcoef_spec(1.0, 1.0, lat)
        func = q_cos if parity == Parity.EVEN else q_sin
        y = sample(lambda t: func(t, ctx), lat, parity)
        dy = rubin_derivative(y)
        d2y = rubin_derivative(dy)
        q = ctx.q
        for sign in (1, -1):
            for k in range(0, 5):
                x = lat.point(sign, k)
                first = spec.a1(x) * dy(x) if parity == Parity.ODD else q * spec.a1(x) * dy(q * x)
                lhs = q * spec.a0(x) * d2y(q * x) + first + spec.a2(x) * y(x)
                assert abs(lhs) < 1e-8


class TestWindows:
    def test_solver_lattice_depth(self, ctx):
        lat = solver_lattice(ctx)
        assert lat.radii[0] == 1.0
        assert ctx.q ** (lat.k_max + 1) * 10 < ctx.series_tol

    def test_override(self, ctx):
        default = solver_lattice(ctx)
        lat = solver_window(ctx, k_min=2)
        assert (lat.k_min, lat.k_max) == (2, default.k_max)
        assert solver_window(ctx) == default
