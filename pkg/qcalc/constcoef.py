"""
Constant-coefficient equations a ∂_q²y + b y = 0.

The solutions with y1(0) = 1, ∂y1(0) = 0 and y2(0) = 0, ∂y2(0) = 1 are
cos(λx, q²) and sin(λx, q²)/λ with λ = √(b/a) (principal root).
"""

from __future__ import annotations

import cmath
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from qcalc.errors import DomainError, ParityError
from qcalc.ivp import SecondOrderSpec
from qcalc.lattice import LatticeFn, Parity, QLattice, shift
from qcalc.qfun import QSeries, q_trig
from qcalc.qops import rubin_derivative
from qcalc.qsymbols import QContext, q_pochhammer

logger = logging.getLogger(__name__)


def _check_a(a: complex) -> complex:
    a = complex(a)
    if a == 0:
        raise DomainError("leading coefficient a must be nonzero")
    return a


def _series_ratio(p: int, parity: Parity, q: float) -> float:
    """a_(n) / a_(n-2) without the -(b/a) factor, n = 2p (even) or 2p+1 (odd)."""
    if parity == Parity.EVEN:
        return q ** (2 * p) * (1 - q) ** 2 / ((1 - q ** (2 * p)) * (1 - q ** (2 * p - 1)))
    return q ** (2 * p) * (1 - q) ** 2 / ((1 - q ** (2 * p + 1)) * (1 - q ** (2 * p)))


def series_solution(
    a: complex,
    b: complex,
    parity: Parity,
    ctx: QContext,
    num_coeffs: Optional[int] = None,
    radius: float = 1.0,
) -> QSeries:
    """Power series solution of a ∂²y + b y = 0 from the coefficient recurrence,
    normalized by a_0 = 1 (even) or a_1 = 1 (odd).

    num_coeffs counts the nonzero coefficients a_(2p) or a_(2p+1), p < num_coeffs.
    """
    a = _check_a(a)
    parity = Parity(parity)
    if parity == Parity.GENERAL:
        raise ParityError("series solutions are even or odd")
    if num_coeffs is None:
        num_coeffs = default_num_coeffs(a, b, ctx, radius)
    ratio = complex(b) / a
    offset = 0 if parity == Parity.EVEN else 1
    coeffs = np.zeros(2 * num_coeffs + offset, dtype=complex)
    current = 1.0 + 0j
    coeffs[offset] = current
    for p in range(1, num_coeffs):
        current *= -ratio * _series_ratio(p, parity, ctx.q)
        coeffs[2 * p + offset] = current
    return QSeries(coefficients=coeffs)


def closed_form_coefficient(a: complex, b: complex, parity: Parity, p: int, ctx: QContext) -> complex:
    """(-1)^p q^(p(p+1)) (b/a)^p (1-q)^n / (q; q)_n with n = 2p or 2p+1."""
    a = _check_a(a)
    q = ctx.q
    n = 2 * p if Parity(parity) == Parity.EVEN else 2 * p + 1
    return (-1) ** p * q ** (p * (p + 1)) * (complex(b) / a) ** p * (1 - q) ** n / q_pochhammer(q, n, ctx)


def default_num_coeffs(a: complex, b: complex, ctx: QContext, radius: float = 1.0) -> int:
    """Smallest count with two consecutive |a_n radius^n| below series_tol."""
    a = _check_a(a)
    ratio = abs(complex(b) / a)
    q = ctx.q
    term = 1.0
    small = 0
    for p in range(1, ctx.max_terms):
        term *= ratio * _series_ratio(p, Parity.EVEN, q) * radius ** 2
        small = small + 1 if term < ctx.series_tol else 0
        if small >= 2:
            return p + 1
    return ctx.max_terms


def _lambda(a: complex, b: complex) -> complex:
    a = _check_a(a)
    b = complex(b)
    if b == 0:
        raise DomainError("coefficient b must be nonzero")
    return cmath.sqrt(b / a)


def closed_form_pair(a: complex, b: complex, ctx: QContext) -> Tuple[Callable[[complex], complex], Callable[[complex], complex]]:
    """(x -> cos(λx, q²), x -> sin(λx, q²)/λ) with λ = √(b/a)."""
    lam = _lambda(a, b)

    def y1(x: complex) -> complex:
        return q_trig(lam * x, ctx)[0]

    def y2(x: complex) -> complex:
        return q_trig(lam * x, ctx)[1] / lam

    return y1, y2


def rewritten_form_residual(a: complex, b: complex, y: LatticeFn, floor: float = 0.0) -> float:
    """Largest residual of the first-order-in-x rewriting of a ∂²y + b y = 0:

    odd y:  a ∂²y(qx) - b(1-q) x ∂y(x)  + b y(x)
    even y: a ∂²y(qx) - bq(1-q) x ∂y(qx) + b y(x)

    taken over lattice points with |x| >= floor where every value exists.
    """
    if y.parity == Parity.GENERAL:
        raise ParityError("rewritten form needs an even or odd function")
    lat = y.lattice
    q = lat.q
    x = lat.points
    d1 = rubin_derivative(y)
    d2_inner = shift(rubin_derivative(d1), "forward").values
    if y.parity == Parity.ODD:
        middle = b * (1 - q) * x * d1.values
    else:
        middle = b * q * (1 - q) * x * shift(d1, "forward").values
    res = np.abs(a * d2_inner - middle + b * y.values)
    keep = np.isfinite(res) & (np.abs(x) >= floor) & (x != 0)
    return float(np.max(res[keep])) if np.any(keep) else 0.0


def wq_constcoef(a: complex, b: complex, x: complex, ctx: QContext) -> complex:
    """W_q(cos(λ.), sin(λ.)/λ)(x) = cos²(λx) + q sin(λx) sin(λqx).

    Equals 1 at x = 0 and tends to 1 as q -> 1.
    """
    lam = _lambda(a, b)
    c, s, _ = q_trig(lam * x, ctx)
    _, s_inner, _ = q_trig(lam * ctx.q * x, ctx)
    return c * c + ctx.q * s * s_inner


def constcoef_spec(a: complex, b: complex, lattice: QLattice, b1: complex = 1.0, b2: complex = 0.0) -> SecondOrderSpec:
    """a ∂²y + b y = 0 as a0 = a/q, a1 = -b(1-q)x, a2 = b, for which E = 0."""
    a = _check_a(a)
    b = complex(b)
    q = lattice.q

    def a0(x):
        return np.full(np.shape(x), a / q, dtype=complex)

    def a1(x):
        return -b * (1 - q) * np.asarray(x, dtype=float)

    def a2(x):
        return np.full(np.shape(x), b, dtype=complex)

    def forcing(x):
        return np.zeros(np.shape(x), dtype=complex)

    return SecondOrderSpec(a0=a0, a1=a1, a2=a2, b=forcing, b1=b1, b2=b2, lattice=lattice)
