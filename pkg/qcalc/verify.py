"""
Invariant suites behind `qcalc verify`.

Every check returns a CheckResult. Tolerances are the larger of a fixed
target and the rounding noise of the difference quotients involved, so a
check stays meaningful (and honest) for any q in (0, 1).
"""

from __future__ import annotations

import math
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel

from qcalc.config import Settings, load_settings
from qcalc.constcoef import (
    closed_form_coefficient,
    closed_form_pair,
    constcoef_spec,
    rewritten_form_residual,
    series_solution,
    wq_constcoef,
)
from qcalc.errors import DomainError, QCalcError
from qcalc.ivp import (
    FirstOrderProblem,
    RegionSpec,
    SecondOrderSpec,
    solve_first_order,
    solve_second_order_linear,
    solver_lattice,
)
from qcalc.lattice import LatticeFn, Parity, QLattice, build_lattice, build_window, sample, shift_power, tail_depth
from qcalc.qfun import b_coeff, q_cos, q_exp, q_sin, q_trig
from qcalc.qint import Domain, ftc_check, ibp_residual, improper_integral, jackson_integral
from qcalc.qops import rubin_derivative, rubin_dq, rubin_parity_form, rubin_product, rubin_via_parity
from qcalc.qsymbols import QContext, bracket_factorial, q_binomial, q_bracket, q_factorial, q_pochhammer, q_pochhammer_inf
from qcalc.wronskian import (
    abel_E,
    abel_residuals,
    branch_scale,
    dq_wq,
    is_fundamental,
    liouville_residuals,
    ray_solution,
    wq,
    wq_ratio_form,
    wronskian_fn,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
# safety factor on first-order rounding estimates
NOISE = 64.0


class CheckResult(BaseModel):
    """Outcome of one named invariant check."""

    name: str
    passed: bool
    max_residual: float
    tolerance: float
    detail: str = ""


def _result(name: str, residual: float, tolerance: float, detail: str = "") -> CheckResult:
    residual = float(residual)
    passed = math.isfinite(residual) and residual <= tolerance
    return CheckResult(name=name, passed=passed, max_residual=residual, tolerance=tolerance, detail=detail)


def _flag(name: str, ok: bool, residual: float = 0.0, detail: str = "") -> CheckResult:
    return CheckResult(name=name, passed=bool(ok), max_residual=float(residual), tolerance=0.0, detail=detail)


def _guarded(name: str, check: Callable[[], List[CheckResult]]) -> List[CheckResult]:
    """Run a check; library errors become a failed result."""
    try:
        return check()
    except QCalcError as e:
        logger.error(f"check {name} raised {type(e).__name__}: {e}")
        return [CheckResult(name=name, passed=False, max_residual=math.inf, tolerance=0.0, detail=f"{type(e).__name__}: {e}")]


def _noise(q: float, x_min: float, order: int = 1) -> float:
    """Relative rounding level of an order-th difference quotient at |x| >= x_min."""
    return NOISE * EPS / ((1 - q) * x_min) ** order


def _band(lat: QLattice, lo: float, hi: float) -> np.ndarray:
    r = np.abs(lat.points)
    return (r >= lo * (1 - 1e-12)) & (r <= hi * (1 + 1e-12))


def _local_scale(f: LatticeFn, x: float, reach: int) -> float:
    """max(1, |f|) over the points ±q^j x, |j| <= reach, inside the window."""
    sign, k = f.lattice.locate(x)
    values = [f.raw(s, k + j) for s in (1, -1) for j in range(-reach, reach + 1)]
    finite = [abs(v) for v in values if np.isfinite(v)]
    return max([1.0] + finite)


def _finite_max(values: np.ndarray, empty: float = 0.0) -> float:
    finite = np.abs(values[np.isfinite(values)])
    return float(np.max(finite)) if finite.size else empty


def _decayed_ring(ctx: QContext, funcs: Sequence[Callable[[float], float]], start: float = 1.0) -> int:
    """Outermost ring k (q^k >= start) where q^(k+1) |f(q^k)| < series_tol for every f."""
    q = ctx.q
    k = math.floor(math.log(start) / math.log(q))
    while any(q ** (k + 1) * abs(f(q ** k)) >= ctx.series_tol for f in funcs):
        k -= 1
    return k


def _max_gap(a: np.ndarray, b: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    gap = np.abs(np.asarray(a) - np.asarray(b))
    if mask is not None:
        gap = gap[mask]
    gap = gap[np.isfinite(gap)]
    return float(np.max(gap)) if gap.size else 0.0


# symbols


def check_symbols(ctx: QContext, settings: Settings) -> List[CheckResult]:
    def pascal():
        worst = 0.0
        for n in range(1, 13):
            for k in range(1, n):
                lhs = q_binomial(n, k, ctx)
                rhs = q_binomial(n - 1, k - 1, ctx) + ctx.q ** k * q_binomial(n - 1, k, ctx)
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return [_result("symbols.pascal", worst, 1e-12)]

    def binomial_edges():
        worst = max(
            max(abs(q_binomial(n, 0, ctx) - 1), abs(q_binomial(n, n, ctx) - 1), abs(q_binomial(n, 1, ctx) - q_bracket(n, ctx)))
            for n in range(1, 13)
        )
        return [_result("symbols.binomial_edges", worst, 1e-12)]

    def inverse_base_factorial():
        worst = 0.0
        for n in range(0, 11):
            lhs = bracket_factorial(n, 1 / ctx.q)
            rhs = ctx.q ** (-n * (n - 1) / 2) * q_factorial(n, ctx)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
        return [_result("symbols.inverse_base_factorial", worst, 1e-10)]

    def pochhammer_split():
        worst = 0.0
        for a in (0.5, -0.25, 0.3 + 0.4j):
            for n in (1, 5, 12):
                full = q_pochhammer_inf(a, ctx)
                split = q_pochhammer(a, n, ctx) * q_pochhammer_inf(a * ctx.q ** n, ctx)
                worst = max(worst, abs(full - split) / max(abs(full), 1e-300))
        return [_result("symbols.pochhammer_split", worst, 1e-12)]

    def binomial_theorem():
        # (-a; q)_n = Σ_k [n, k]_q q^(k(k-1)/2) a^k
        worst = 0.0
        for a in (0.3, 1.0, 2 + 1j):
            for n in range(0, 7):
                lhs = q_pochhammer(-a, n, ctx)
                rhs = sum(q_binomial(n, k, ctx) * ctx.q ** (k * (k - 1) // 2) * a ** k for k in range(n + 1))
                worst = max(worst, abs(lhs - rhs) / abs(lhs))
        return [_result("symbols.binomial_theorem", worst, 1e-12)]

    def factorial_from_pochhammer():
        q = ctx.q
        worst = max(
            abs(q_factorial(n, ctx) - q_pochhammer(q, n, ctx).real / (1 - q) ** n) / q_factorial(n, ctx)
            for n in range(0, 13)
        )
        return [_result("symbols.factorial_pochhammer", worst, 1e-12)]

    results = []
    for name, check in (
        ("symbols.pascal", pascal),
        ("symbols.binomial_edges", binomial_edges),
        ("symbols.inverse_base_factorial", inverse_base_factorial),
        ("symbols.pochhammer_split", pochhammer_split),
        ("symbols.binomial_theorem", binomial_theorem),
        ("symbols.factorial_pochhammer", factorial_from_pochhammer),
    ):
        results += _guarded(name, check)
    return results


# ops


def _monomial_derivative(m: int, q: float) -> float:
    """Coefficient c in ∂_q x^m = c x^(m-1)."""
    if m == 0:
        return 0.0
    bracket = (1 - q ** m) / (1 - q)
    return bracket if m % 2 == 1 else q ** (-m) * bracket


def check_ops(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q

    def monomials():
        lat = build_lattice(ctx, -6, 10)
        x = lat.points
        interior = np.isfinite(rubin_derivative(sample(lambda t: t, lat, Parity.ODD)).values) & (x != 0)
        worst_formula = worst_parity = 0.0
        for m in range(0, 9):
            parity = Parity.EVEN if m % 2 == 0 else Parity.ODD
            f = sample(lambda t, m=m: t ** m, lat, parity)
            d = rubin_derivative(f).values
            expected = _monomial_derivative(m, q) * np.where(x != 0, x, 1.0) ** (m - 1)
            scale = np.where(expected != 0, np.abs(expected), 1.0)
            worst_formula = max(worst_formula, _max_gap(d / scale, expected / scale, interior))
            for i in np.flatnonzero(interior)[::3]:
                pf = rubin_parity_form(f, float(x[i]))
                worst_parity = max(worst_parity, abs(pf - d[i]) / scale[i])
        tol = max(1e-12, NOISE * EPS / (1 - q))
        return [
            _result("ops.monomials", worst_formula, tol),
            _result("ops.parity_form", worst_parity, tol),
        ]

    def via_parity():
        lat = build_lattice(ctx, -5, 7)
        rng = np.random.default_rng(settings.seed)
        worst = 0.0
        for _ in range(20):
            poly = Polynomial(rng.uniform(-1, 1, size=9))
            f = sample(lambda t: poly(t), lat, Parity.GENERAL)
            levels = [f]
            for _n in range(4):
                levels.append(rubin_derivative(levels[-1]))
            for n in range(1, 5):
                for sign in (1, -1):
                    for k in (0, 1, 2):
                        x = lat.point(sign, k)
                        iterated = levels[n].value(sign, k)
                        direct = rubin_via_parity(f, x, n)
                        used = max(abs(poly(x * q ** j)) for j in range(-n, n + 1))
                        floor = NOISE * EPS * (4 / q) ** n * used / ((1 - q) * abs(x)) ** n
                        worst = max(worst, abs(direct - iterated) / max(abs(iterated), floor * 1e10))
        return [_result("ops.via_parity", worst, 1e-10)]

    def product_rule():
        lat = build_lattice(ctx, -2, 6)
        even = sample(lambda t: 1 + t ** 2 - 0.5 * t ** 4, lat, Parity.EVEN)
        even2 = sample(lambda t: 2 - t ** 2 + t ** 6, lat, Parity.EVEN)
        odd = sample(lambda t: t - 2 * t ** 3, lat, Parity.ODD)
        odd2 = sample(lambda t: 3 * t + t ** 5, lat, Parity.ODD)
        worst = 0.0
        for f, g in ((even, odd), (odd, even), (even, even2), (odd, odd2)):
            fg = f * g
            for k in range(0, 3):
                for sign in (1, -1):
                    x = lat.point(sign, k)
                    direct = rubin_dq(fg, x)
                    rule = rubin_product(f, g, x)
                    used = _local_scale(f, x, 2) * _local_scale(g, x, 2)
                    floor = NOISE * EPS * used / (q * (1 - q) * abs(x))
                    worst = max(worst, abs(direct - rule) / max(abs(direct), floor * 1e10))
        return [_result("ops.product_rule", worst, 1e-10)]

    def commutation():
        lat = build_lattice(ctx, -6, 10)
        f = sample(lambda t: 1 - 2 * t + 0.5 * t ** 3 + t ** 4 - 0.25 * t ** 7, lat, Parity.GENERAL)
        df = rubin_derivative(f)
        nonzero = lat.points != 0
        worst = 0.0
        for n, factor in ((1, q), (-1, 1 / q)):
            lhs = rubin_derivative(shift_power(f, n)).values
            rhs = factor * shift_power(df, n).values
            scale = np.where(np.abs(rhs) > 0, np.abs(rhs), 1.0)
            worst = max(worst, _max_gap(lhs / scale, rhs / scale, nonzero))
        return [_result("ops.commutation", worst, 1e-12)]

    def classical_limit():
        # ∂_q(x³ + x) - (3x² + 1) = -(1-q)(2+q)x² on the positive ring
        k = round(math.log(0.5) / math.log(q))
        lat = build_lattice(ctx, k - 2, k + 2)
        f = sample(lambda t: t ** 3 + t, lat, Parity.ODD)
        x = lat.point(1, k)
        gap = rubin_dq(f, x) - (3 * x * x + 1)
        ratio = gap / ((1 - q) * x * x)
        tol = max(1e-9, NOISE * EPS * (x ** 3 + x) / (q * (1 - q) ** 2 * x ** 3))
        return [_result("ops.classical_limit", abs(ratio + (2 + q)), tol)]

    results = []
    for name, check in (
        ("ops.monomials", monomials),
        ("ops.via_parity", via_parity),
        ("ops.product_rule", product_rule),
        ("ops.commutation", commutation),
        ("ops.classical_limit", classical_limit),
    ):
        results += _guarded(name, check)
    return results


# int


def check_int(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q
    deep = build_lattice(ctx, 0, tail_depth(ctx, 10.0) + 2)

    def ftc():
        cases = (
            ("t^3", lambda t: t ** 3, Parity.ODD),
            ("1+t^2-t^6", lambda t: 1 + t ** 2 - t ** 6, Parity.EVEN),
            ("sin", lambda t: q_sin(t, ctx), Parity.ODD),
            ("cos", lambda t: q_cos(t, ctx), Parity.EVEN),
        )
        results = []
        for label, func, parity in cases:
            f = sample(func, deep, parity)
            report = ftc_check(f)
            results.append(_result(f"int.ftc[{label}]", report.max_residual, 1e-10 * max(1.0, f.max_abs())))
        return results

    def ibp():
        a = deep.point(1, deep.k_min + 1)
        cases = (
            ("poly", lambda t: 1 + t + t ** 2, lambda t: t ** 3 - t + 2),
            ("trig", lambda t: q_cos(t, ctx), lambda t: q_sin(t, ctx) + 0.5 * q_cos(t, ctx)),
        )
        results = []
        for label, fa, ga in cases:
            f = sample(fa, deep, Parity.GENERAL)
            g = sample(ga, deep, Parity.GENERAL)
            scale = max(1.0, f.max_abs() * g.max_abs())
            results.append(_result(f"int.ibp[{label}]", abs(ibp_residual(f, g, a)), 1e-10 * scale))
        return results

    def improper():
        def gauss(t):
            return t * t * math.exp(-t * t)

        def scaled_gauss(t):
            return gauss(q * t)

        outer = _decayed_ring(ctx, (gauss, scaled_gauss), start=1.0)
        lat = build_lattice(ctx, outer, tail_depth(ctx, 1.0) + 2)
        f = sample(gauss, lat, Parity.EVEN)
        g = sample(scaled_gauss, lat, Parity.EVEN)
        full = improper_integral(f, Domain.FULL_LINE)
        half = improper_integral(f, Domain.POSITIVE_AXIS)
        scaled = improper_integral(g, Domain.FULL_LINE)
        return [
            _result("int.improper_scaling", abs(q * scaled - full) / abs(full), 1e-12),
            _result("int.improper_symmetry", abs(full - 2 * half) / abs(full), 1e-13),
        ]

    def ibp_whole_line():
        # f, g vanish on the outer and inner rings, so no boundary term survives
        lat = build_lattice(ctx, -4, 16)
        rng = np.random.default_rng(settings.seed)
        support = np.zeros(lat.rings)
        support[4:15] = 1.0

        def compact():
            pos = support * rng.uniform(-1, 1, lat.rings)
            neg = support * rng.uniform(-1, 1, lat.rings)
            return LatticeFn.from_rings(lat, pos, neg, 0j)

        f, g = compact(), compact()
        lhs = rubin_derivative(f) * g
        rhs = f * rubin_derivative(g)
        gap = improper_integral(lhs + rhs, Domain.FULL_LINE)
        scale = improper_integral(lhs.map(np.abs), Domain.FULL_LINE).real
        return [_result("int.ibp_whole_line", abs(gap) / scale, 1e-10)]

    def linearity():
        f = sample(lambda t: q_cos(t, ctx), deep, Parity.EVEN)
        g = sample(lambda t: t ** 3 - t, deep, Parity.ODD)
        alpha, beta = 0.7, -1.3 + 0.4j
        h = alpha * f + beta * g
        worst = 0.0
        for sign in (1, -1):
            for k in (deep.k_min, deep.k_min + 1, deep.k_min + 3):
                x = deep.point(sign, k)
                parts = alpha * jackson_integral(f, x), beta * jackson_integral(g, x)
                gap = abs(jackson_integral(h, x) - sum(parts))
                worst = max(worst, gap / max(abs(parts[0]) + abs(parts[1]), 1e-300))
        return [_result("int.linearity", worst, 1e-12)]

    def riemann_limit():
        # at q = 0.99 the Jackson sum on [0, 1] is within 2(1-q) max|f'| of the Riemann integral
        near = ctx.with_q(0.99)
        lat = build_lattice(near, 0, tail_depth(near, 16.0) + 1)
        cases = (
            ("t^4", lambda t: t ** 4, 1 / 5, 4.0),
            ("(1+t)^4", lambda t: (1 + t) ** 4, 31 / 5, 32.0),
            ("t^2-t", lambda t: t * t - t, -1 / 6, 1.0),
            ("1+2t-3t^3", lambda t: 1 + 2 * t - 3 * t ** 3, 5 / 4, 7.0),
        )
        results = []
        for label, func, exact, max_slope in cases:
            value = jackson_integral(sample(func, lat), 1.0)
            bound = 2 * (1 - near.q) * max_slope
            results.append(_result(f"int.riemann_limit[{label}]", abs(value - exact), bound))
        return results

    results = []
    for name, check in (
        ("int.ftc", ftc),
        ("int.ibp", ibp),
        ("int.ibp_whole_line", ibp_whole_line),
        ("int.linearity", linearity),
        ("int.improper", improper),
        ("int.riemann_limit", riemann_limit),
    ):
        results += _guarded(name, check)
    return results


# fun


def check_fun(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q
    lat = build_window(ctx, outer=1 / q, inner=1e-2 * q)
    band = _band(lat, 1e-2, 1.0)
    tol = max(1e-8, _noise(q, 1e-2))

    def derivatives():
        results = []
        for lam in (0.5, 1.0, 2.0):
            c = sample(lambda t: q_cos(lam * t, ctx), lat, Parity.EVEN)
            s = sample(lambda t: q_sin(lam * t, ctx), lat, Parity.ODD)
            e = sample(lambda t: q_exp(lam * t, ctx), lat, Parity.GENERAL)
            worst = max(
                _max_gap(rubin_derivative(c).values, -lam * s.values, band),
                _max_gap(rubin_derivative(s).values, lam * c.values, band),
                _max_gap(rubin_derivative(e).values, lam * e.values, band),
            )
            results.append(_result(f"fun.derivatives[lambda={lam}]", worst, tol * max(1.0, e.max_abs())))
        return results

    def parity():
        worst = 0.0
        for x in (0.1, 0.7, 1.3, 2.9):
            c, s, _ = q_trig(x, ctx)
            cm, sm, _ = q_trig(-x, ctx)
            worst = max(worst, abs(c - cm), abs(s + sm))
        return [_result("fun.parity", worst, 1e-15)]

    def exp_decomposition():
        worst = 0.0
        for z in (0.5 + 0.25j, 1.5, -0.8 + 1.1j):
            e = q_exp(z, ctx)
            split = q_cos(-1j * z, ctx) + 1j * q_sin(-1j * z, ctx)
            worst = max(worst, abs(e - split) / max(1.0, abs(e)))
        return [_result("fun.exp_decomposition", worst, 1e-12)]

    def pair_decay():
        # |b_(n+2)(x)| < |b_n(x)| from the first n where the pair ratio drops below 1
        worst = 0.0
        for x in (2.0, 5.0):
            steps = [x / q_bracket(n + 1, ctx) * (q ** (n + 1) if n % 2 else 1.0) for n in range(ctx.max_terms)]
            started = False
            log_b = 0.0
            for n in range(len(steps) - 1):
                if steps[n] == 0 or steps[n + 1] == 0 or log_b < math.log(1e-280):
                    break
                ratio = steps[n] * steps[n + 1]
                started = started or ratio < 1
                if started:
                    worst = max(worst, ratio)
                log_b += math.log(steps[n])
        return [_result("fun.pair_decay", worst, 1.0 - 1e-15)]

    def first_coefficients():
        # the pass-wise ratios reproduce b_n from its defining product
        worst = max(
            abs(_coefficient_by_ratios(n, ctx) - b_coeff(n, 1.0, ctx)) / abs(b_coeff(n, 1.0, ctx))
            for n in range(0, 16)
        )
        return [_result("fun.b_coefficients", worst, 1e-12)]

    results = []
    for name, check in (
        ("fun.derivatives", derivatives),
        ("fun.parity", parity),
        ("fun.exp_decomposition", exp_decomposition),
        ("fun.pair_decay", pair_decay),
        ("fun.b_coefficients", first_coefficients),
    ):
        results += _guarded(name, check)
    return results


def _coefficient_by_ratios(n: int, ctx: QContext) -> float:
    term = 1.0
    for j in range(n):
        term *= (ctx.q ** (j + 1) if j % 2 else 1.0) / q_bracket(j + 1, ctx)
    return term


# ivp


def _compare_on_window(sol_fn: LatticeFn, reference: Callable[[float], complex], h: float) -> float:
    lat = sol_fn.lattice
    inside = _band(lat, 0.0, h) | (lat.points == 0)
    expected = np.array([reference(float(x)) for x in lat.points])
    return _max_gap(sol_fn.values, expected, inside)


def check_ivp(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q

    def trig_pair():
        spec = constcoef_spec(1.0, 1.0, solver_lattice(ctx), b1=1.0, b2=1.0)
        even, odd, combined = solve_second_order_linear(spec, settings=settings)
        cos_gap = _compare_on_window(even.y, lambda t: q_cos(t, ctx), even.h_used)
        sin_gap = _compare_on_window(odd.y, lambda t: q_sin(t, ctx), odd.h_used)
        return [
            _result("ivp.cos_branch", cos_gap, 1e-8),
            _result("ivp.sin_branch", sin_gap, 1e-8),
            _result("ivp.residual", combined.residual, 1e-8),
            _result("ivp.characterization", combined.characterization, 1e-10),
            _flag("ivp.certificate", even.certified(settings.rho) and odd.certified(settings.rho),
                  max(even.contraction_ratios + odd.contraction_ratios, default=0.0)),
        ]

    def monomial_rhs():
        lat = solver_lattice(ctx)
        problem = FirstOrderProblem(
            f=lambda xs, Y: xs[None, :] + 0j * Y,
            region=RegionSpec(alpha=1.0, beta=1.0, rho=settings.rho, y0=[0.0]),
            lattice=lat,
            parity=(Parity.EVEN,),
        )
        sol = solve_first_order(problem, settings=settings)
        gap = _compare_on_window(sol.y, lambda t: q * q * t * t / (1 + q), sol.h_used)
        return [_result("ivp.dy_equals_x", gap, 1e-12)]

    def zero_data():
        spec = constcoef_spec(1.0, 1.0, solver_lattice(ctx), b1=0.0, b2=0.0)
        _, _, combined = solve_second_order_linear(spec, settings=settings)
        y = combined.y.values
        return [_result("ivp.zero_data", float(np.max(np.abs(y[np.isfinite(y)]), initial=0.0)), 0.0)]

    results = []
    for name, check in (("ivp.trig_pair", trig_pair), ("ivp.monomial_rhs", monomial_rhs), ("ivp.zero_data", zero_data)):
        results += _guarded(name, check)
    return results


# wronskian


def _variable_specs(lat: QLattice) -> Dict[str, SecondOrderSpec]:
    q = lat.q

    def one(x):
        return np.ones(np.shape(x), dtype=complex)

    def zero(x):
        return np.zeros(np.shape(x), dtype=complex)

    def ramp(x):
        return (1 - q) * np.asarray(x, dtype=float) + 0j

    return {
        "a1=0": SecondOrderSpec(a0=one, a1=zero, a2=one, b=zero, lattice=lat),
        "a1=1": SecondOrderSpec(a0=one, a1=one, a2=one, b=zero, lattice=lat),
        "a1=x(1-q)": SecondOrderSpec(a0=one, a1=ramp, a2=one, b=zero, lattice=lat),
    }


def check_wronskian(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q

    def abel_liouville():
        # ray solutions solve the branch recurrence on the positive ring; the
        # negative ring is their parity image, so the laws are checked for x > 0
        lat = build_window(ctx, outer=1.0, inner=1e-7)
        inner, nxt = lat.radii[-1], lat.radii[-2]
        results = []
        for label, spec in _variable_specs(lat).items():
            for branch in (Parity.ODD, Parity.EVEN):
                y1 = ray_solution(spec, branch, 1.0, 1.0)
                y2 = ray_solution(spec, branch, inner, nxt)
                w = wronskian_fn(y1, y2)
                c = branch_scale(branch, q)
                norm = max(1e-300, _finite_max(w.ring(1)))
                abel = _finite_max(abel_residuals(spec, w, c).ring(1))
                liouville = _finite_max(liouville_residuals(spec, w, c).ring(1), empty=math.nan)
                tag = f"{label},{branch.value}"
                results.append(_result(f"wronskian.abel[{tag}]", abel / norm, 1e-6))
                results.append(_result(f"wronskian.liouville[{tag}]", liouville / norm, 1e-6))
        return results

    def dispatch():
        lat = build_window(ctx, outer=1 / q ** 3, inner=1e-2 * q ** 3)
        c = sample(lambda t: q_cos(t, ctx), lat, Parity.EVEN)
        s = sample(lambda t: q_sin(t, ctx), lat, Parity.ODD)
        x1 = sample(lambda t: t, lat, Parity.ODD)
        x3 = sample(lambda t: t ** 3 - t, lat, Parity.ODD)
        e2 = sample(lambda t: 1 + t * t, lat, Parity.EVEN)
        e4 = sample(lambda t: t ** 4, lat, Parity.EVEN)
        pts = [x for x in lat.points if 1e-2 * (1 - 1e-12) <= abs(x) <= 1 + 1e-12]
        ratio_gap = anti_gap = dq_gap = 0.0
        for y1, y2 in ((c, s), (x1, x3), (e2, e4), (s, c)):
            w = wronskian_fn(y1, y2)
            dw = rubin_derivative(w)
            for x in pts:
                near = _local_scale(y1, x, 3) * _local_scale(y2, x, 3)
                direct = wq(y1, y2, x)
                ratio_gap = max(ratio_gap, abs(direct - wq_ratio_form(y1, y2, x)) / near)
                anti_gap = max(anti_gap, abs(direct + wq(y2, y1, x)))
                if abs(x) >= 0.1 * (1 - 1e-12):
                    dq_gap = max(dq_gap, abs(dq_wq(y1, y2, x) - dw.at(x)) / near)
        return [
            _result("wronskian.ratio_form", ratio_gap, max(1e-10, _noise(q, 1e-2) / q)),
            _result("wronskian.antisymmetry", anti_gap, 0.0),
            _result("wronskian.dq_wq", dq_gap, max(1e-8, _noise(q, 0.1, 2) / q ** 2)),
        ]

    def fundamental():
        lat = build_window(ctx, outer=1.0, inner=1e-7)
        c = sample(lambda t: q_cos(t, ctx), lat, Parity.EVEN)
        s = sample(lambda t: q_sin(t, ctx), lat, Parity.ODD)
        w = wronskian_fn(c, s)
        even_gap = _max_gap(w.ring(1), w.ring(-1)) / max(1.0, w.max_abs())
        return [
            _result("wronskian.w0_is_one", abs(w.value_at_zero - 1), 1e-8),
            _result("wronskian.even_parity", even_gap, 1e-13),
            _flag("wronskian.fundamental_pair", is_fundamental(c, s)),
            _flag("wronskian.proportional_pair", not is_fundamental(c, c * 2.0)),
        ]

    def solver_pair():
        spec = constcoef_spec(1.0, 1.0, solver_lattice(ctx), b1=1.0, b2=1.0)
        even, odd, _ = solve_second_order_linear(spec, settings=settings)
        # det(b_ij) = 1 for the pair, 0 for (y1, 2 y1)
        return [
            _flag("wronskian.solver_pair_fundamental", is_fundamental(even.y, odd.y)),
            _flag("wronskian.solver_pair_proportional", not is_fundamental(even.y, even.y * 2.0)),
        ]

    results = []
    for name, check in (
        ("wronskian.abel_liouville", abel_liouville),
        ("wronskian.dispatch", dispatch),
        ("wronskian.fundamental", fundamental),
        ("wronskian.solver_pair", solver_pair),
    ):
        results += _guarded(name, check)
    return results


# constcoef


def check_constcoef(ctx: QContext, settings: Settings) -> List[CheckResult]:
    q = ctx.q

    def coefficients():
        worst = 0.0
        for a, b in ((1.0, 1.0), (q, 1.0), (2.0, -0.5)):
            for parity in (Parity.EVEN, Parity.ODD):
                series = series_solution(a, b, parity, ctx, num_coeffs=13)
                offset = 0 if parity == Parity.EVEN else 1
                for p in range(13):
                    got = series.coefficients[2 * p + offset]
                    expected = closed_form_coefficient(a, b, parity, p, ctx)
                    worst = max(worst, abs(got - expected) / abs(expected))
        return [_result("constcoef.series_closed_form", worst, 1e-12)]

    def rewritten():
        floor = min(0.5, max(1e-2, 1e-3 / (1 - q)))
        lat = build_window(ctx, outer=1 / q ** 3, inner=floor * q ** 3)
        tol = max(1e-8, _noise(q, floor, 2))
        results = []
        for a, b in ((1.0, 1.0), (q, 1.0)):
            y1, y2 = closed_form_pair(a, b, ctx)
            for label, func, parity in (("cos", y1, Parity.EVEN), ("sin", y2, Parity.ODD)):
                y = sample(func, lat, parity)
                residual = rewritten_form_residual(a, b, y, floor=floor)
                scale = max(1.0, y.max_abs()) * max(abs(a), abs(b))
                results.append(_result(f"constcoef.rewritten[{label},a={a:.3g}]", residual / scale, tol))
        return results

    def wronskian_value():
        lat = build_window(ctx, outer=1 / q ** 2, inner=1e-2 * q ** 2)
        band = _band(lat, 1e-2, 1.0)
        results = [_result("constcoef.w_at_zero", abs(wq_constcoef(1.0, 1.0, 0.0, ctx) - 1), 0.0)]
        for a, b in ((1.0, 1.0), (q, 1.0)):
            y1, y2 = closed_form_pair(a, b, ctx)
            w = wronskian_fn(sample(y1, lat, Parity.EVEN), sample(y2, lat, Parity.ODD))
            expected = np.array([wq_constcoef(a, b, float(x), ctx) for x in lat.points])
            results.append(
                _result(f"constcoef.w_closed_form[a={a:.3g}]", _max_gap(w.values, expected, band), max(1e-10, _noise(q, 1e-2)))
            )
        return results

    def abel_vanishes():
        lat = solver_lattice(ctx)
        x = lat.points[lat.points != 0]
        worst = 0.0
        for a, b in ((1.0, 1.0), (q, 1.0), (2.0, 3.0)):
            E = np.abs(np.asarray(abel_E(constcoef_spec(a, b, lat), x)))
            worst = max(worst, float(np.max(E * abs(a) / (q * abs(b) * np.abs(x)))))
        return [_result("constcoef.abel_E_zero", worst, 4 * EPS)]

    def picard_vs_closed_form():
        spec = constcoef_spec(q, 1.0, solver_lattice(ctx), b1=1.0, b2=1.0)
        even, odd, _ = solve_second_order_linear(spec, settings=settings)
        y1, y2 = closed_form_pair(q, 1.0, ctx)
        return [
            _result("constcoef.picard_cos", _compare_on_window(even.y, y1, even.h_used), 1e-6),
            _result("constcoef.picard_sin", _compare_on_window(odd.y, y2, odd.h_used), 1e-6),
        ]

    results = []
    for name, check in (
        ("constcoef.coefficients", coefficients),
        ("constcoef.rewritten", rewritten),
        ("constcoef.wronskian", wronskian_value),
        ("constcoef.abel_E", abel_vanishes),
        ("constcoef.picard", picard_vs_closed_form),
    ):
        results += _guarded(name, check)
    return results


SUITES: Dict[str, Callable[[QContext, Settings], List[CheckResult]]] = {
    "symbols": check_symbols,
    "ops": check_ops,
    "int": check_int,
    "fun": check_fun,
    "ivp": check_ivp,
    "wronskian": check_wronskian,
    "constcoef": check_constcoef,
}


def run_suite(name: str, ctx: QContext, settings: Optional[Settings] = None) -> List[CheckResult]:
    """Run one suite, or every suite for name "all".

    Raises:
        DomainError: unknown suite name.
    """
    settings = settings or load_settings()
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise DomainError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    results: List[CheckResult] = []
    for suite in names:
        logger.info(f"running suite {suite} at q={ctx.q}")
        results += SUITES[suite](ctx, settings)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} checks failed: {', '.join(failed)}")
    return results
