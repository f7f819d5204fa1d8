import operator

import numpy as np
import pytest

from qcalc.errors import DomainError, EvaluationError, MissingValue
from qcalc.lattice import (
    LatticeFn,
    Parity,
    build_lattice,
    build_window,
    estimate_zero_limit,
    extrapolate_to_zero,
    parity_decompose,
    sample,
    shift,
    shift_power,
    tail_depth,
)


class TestQLattice:
    def test_point_count_and_order(self, ctx):
        lat = build_lattice(ctx, 0, 4)
        assert len(lat) == 11
        assert lat.zero_index == 5
        assert np.all(np.diff(lat.points) > 0)
        assert lat.points[lat.zero_index] == 0

    def test_empty_window(self, ctx):
        with pytest.raises(DomainError):
            build_lattice(ctx, 3, 1)

    @pytest.mark.parametrize("x, expected", [(0.25, (1, 2)), (-0.5, (-1, 1)), (2.0, (1, -1)), (0.0, (0, 0))])
    def test_locate(self, shallow, x, expected):
        assert shallow.locate(x) == expected

    def test_locate_off_lattice(self, shallow):
        with pytest.raises(DomainError):
            shallow.locate(0.3)

    def test_locate_outside_window(self, shallow):
        with pytest.raises(MissingValue):
            shallow.locate(0.5 ** 20)

    def test_position_matches_points(self, shallow):
        for sign in (1, -1):
            for k in shallow.ks:
                assert shallow.points[shallow.position(sign, int(k))] == shallow.point(sign, int(k))

    def test_build_window_covers_radii(self, ctx):
        lat = build_window(ctx, 1.0, 1e-2)
        assert lat.radii[0] == 1.0
        assert lat.radii[-1] <= 1e-2
        assert lat.radii[-2] > 1e-2

    @pytest.mark.parametrize("scale", [1.0, 10.0])
    def test_tail_depth(self, ctx, scale):
        k = tail_depth(ctx, scale)
        assert ctx.q ** (k + 1) * scale < ctx.series_tol


class TestSample:
    def test_even_hint_kept(self, shallow):
        f = sample(lambda x: 1 + x * x, shallow, Parity.EVEN)
        assert f.parity == Parity.EVEN
        assert f.check_parity() == 0

    def test_wrong_hint_downgraded(self, shallow):
        f = sample(lambda x: x * x, shallow, Parity.ODD)
        assert f.parity == Parity.GENERAL

    def test_expression_failure(self, shallow):
        with pytest.raises(EvaluationError):
            sample(lambda x: 1 / x, shallow)

    def test_non_finite_value(self, shallow):
        with pytest.raises(EvaluationError):
            sample(lambda x: float("nan"), shallow)

    def test_q_regular_flag(self, ctx):
        lat = build_lattice(ctx, 0, 30)
        assert sample(lambda x: 1 + x, lat).q_regular
        assert not sample(lambda x: 1.0 if x == 0 else 2.0, lat).q_regular


class TestLatticeFn:
    def test_missing_value(self, shallow):
        f = sample(lambda x: x, shallow)
        with pytest.raises(MissingValue):
            shift(f).value(1, shallow.k_max)

    def test_value_lookup(self, shallow):
        f = sample(lambda x: 3 * x + 1, shallow)
        assert f(0.25) == pytest.approx(1.75)
        assert f.value_at_zero == 1

    def test_arithmetic_parity(self, shallow):
        even = sample(lambda x: x * x, shallow, Parity.EVEN)
        odd = sample(lambda x: x, shallow, Parity.ODD)
        assert (even * odd).parity == Parity.ODD
        assert (odd * odd).parity == Parity.EVEN
        assert (even + odd).parity == Parity.GENERAL
        assert (2 * odd).parity == Parity.ODD
        np.testing.assert_allclose((even - even).values, 0)

    def test_different_lattices(self, ctx, shallow):
        f = sample(lambda x: x, shallow)
        g = sample(lambda x: x, build_lattice(ctx, 0, 3))
        with pytest.raises(DomainError):
            f + g

    @pytest.mark.parametrize("op", [operator.add, operator.sub, operator.mul])
    @pytest.mark.parametrize("window", [(0, 3), (-2, 11)])
    def test_mismatched_lattices_raise_domain_error(self, ctx, shallow, op, window):
        f = sample(lambda x: x, shallow)
        g = sample(lambda x: x, build_lattice(ctx, *window))
        with pytest.raises(DomainError, match="different lattices"):
            op(f, g)

    def test_restrict(self, shallow):
        f = sample(lambda x: x, shallow).restrict(1.0)
        outside = np.abs(shallow.points) > 1.0
        assert np.all(f.missing == outside)

    def test_csv_rows(self, shallow):
        rows = sample(lambda x: x, shallow).to_csv_rows()
        assert len(rows) == len(shallow)
        assert [r[1] for r in rows] == list(shallow.points)
        assert rows[shallow.zero_index][0] == "zero"

    def test_values_are_read_only(self, shallow):
        f = sample(lambda x: x, shallow)
        with pytest.raises(ValueError):
            f.values[0] = 1


class TestParityAndShift:
    def test_decompose(self, shallow):
        f = sample(lambda x: 1 + x + x ** 2 + x ** 3, shallow)
        f_e, f_o = parity_decompose(f)
        assert f_e.parity == Parity.EVEN and f_o.parity == Parity.ODD
        np.testing.assert_allclose((f_e + f_o).values, f.values, rtol=1e-15)
        np.testing.assert_allclose(f_e.values, 1 + shallow.points ** 2, rtol=1e-14)

    def test_forward_shift(self, shallow):
        f = sample(lambda x: x ** 2 + x, shallow)
        g = shift(f, "forward")
        for k in range(shallow.k_min, shallow.k_max):
            assert g.value(-1, k) == f.value(-1, k + 1)
        assert g.missing[shallow.position(1, shallow.k_max)]

    def test_shift_power_inverts(self, shallow):
        f = sample(lambda x: x ** 3, shallow)
        g = shift_power(shift_power(f, 2), -2)
        k = shallow.k_min + 3
        assert g.value(1, k) == f.value(1, k)

    def test_bad_direction(self, shallow):
        with pytest.raises(DomainError):
            shift(sample(lambda x: x, shallow), "sideways")


class TestZeroLimit:
    def test_linear_data_is_exact(self, ctx):
        lat = build_lattice(ctx, 0, 12)
        values = 2 + 3 * lat.radii
        estimate, _ = extrapolate_to_zero(values, lat.radii, ctx.q)
        assert estimate == pytest.approx(2, abs=1e-12)

    def test_single_ring(self, ctx):
        estimate, error = extrapolate_to_zero([1.5], [0.5], ctx.q)
        assert estimate == 1.5 and error == np.inf

    def test_both_rings(self, ctx):
        lat = build_lattice(ctx, 0, 12)
        f = LatticeFn(lattice=lat, values=np.where(lat.points == 0, np.nan, 5 - lat.points))
        estimate, error = estimate_zero_limit(f)
        assert estimate == pytest.approx(5, abs=1e-12)
        assert error < 1e-9
