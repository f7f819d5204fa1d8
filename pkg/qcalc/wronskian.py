"""
q-Wronskian of two lattice functions for Rubin's operator, the Abel
recurrence it satisfies for solutions of a second-order equation, the
Liouville product and the fundamental-set test.

With E(x) = (a1(x) + x(1-q) a2(x)) / a0(x), two solutions of the same branch
satisfy

    odd branch:  W(qx) = (1 + (1-q) x E(x)) W(x)
    even branch: W(qx) = (1 + q(1-q) x E(x)) W(x)

and unrolling the recurrence towards 0 gives W(x) = W(0) / Π_k (1 + c x(1-q) q^k E(x q^k))
with c = 1 (odd) or q (even).
"""

from __future__ import annotations

import math
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from qcalc.config import REGULARITY_TOL
from qcalc.errors import DomainError, NotQRegular, ParityError, SingularFactor, TailNotNegligible
from qcalc.ivp import SecondOrderSpec, eval_coefficient
from qcalc.lattice import LatticeFn, Parity, estimate_zero_limit, extrapolate_to_zero, shift
from qcalc.qops import rubin_derivative, rubin_derivative_n, rubin_dq, rubin_dq_zero

logger = logging.getLogger(__name__)

FUNDAMENTAL_REL_TOL = 1e-8


class WronskianReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w_values: LatticeFn
    E_values: Dict[float, complex]
    abel_residual: float
    liouville_residual: float
    fundamental: bool
    w0: complex


def _require_parity(*fs: LatticeFn) -> None:
    for f in fs:
        if f.parity == Parity.GENERAL:
            raise ParityError("q-Wronskian dispatch needs declared even/odd parity")


def wq(y1: LatticeFn, y2: LatticeFn, x: float) -> complex:
    """W_q(y1, y2)(x) by parity:

    (even, odd):  y1(x) ∂y2(x) - q y2(x) ∂y1(qx)
    (odd, odd):   y1(x) ∂y2(x) - y2(x) ∂y1(x)
    (even, even): q y1(x) ∂y2(qx) - q y2(x) ∂y1(qx)
    (odd, even):  -W_q(y2, y1)(x)

    At x = 0 the derivatives are the extrapolated limits.
    """
    _require_parity(y1, y2)
    if y1.parity == Parity.ODD and y2.parity == Parity.EVEN:
        return -wq(y2, y1, x)
    lat = y1.lattice
    q = lat.q
    sign, k = lat.locate(x)

    if sign == 0:
        if y1.parity == Parity.EVEN and y2.parity == Parity.ODD:
            probe = lat.point(1, lat.k_min)
            return y1.value_at_zero * rubin_dq_zero(y2, probe)
        return 0j

    here = lat.point(sign, k)
    inner = lat.point(sign, k + 1)
    if y1.parity == Parity.EVEN and y2.parity == Parity.ODD:
        return y1.value(sign, k) * rubin_dq(y2, here) - q * y2.value(sign, k) * rubin_dq(y1, inner)
    if y1.parity == Parity.ODD:
        return y1.value(sign, k) * rubin_dq(y2, here) - y2.value(sign, k) * rubin_dq(y1, here)
    return q * (y1.value(sign, k) * rubin_dq(y2, inner) - y2.value(sign, k) * rubin_dq(y1, inner))


def wq_ratio_form(y1: LatticeFn, y2: LatticeFn, x: float) -> complex:
    """(y2(x) y1(qx) - y1(x) y2(qx)) / ((1-q) x), valid for every parity."""
    lat = y1.lattice
    sign, k = lat.locate(x)
    if sign == 0:
        raise DomainError("the ratio form is undefined at x = 0")
    q = lat.q
    xv = lat.point(sign, k)
    num = y2.value(sign, k) * y1.value(sign, k + 1) - y1.value(sign, k) * y2.value(sign, k + 1)
    return num / ((1 - q) * xv)


def _terms(y1: LatticeFn, y2: LatticeFn) -> Tuple[np.ndarray, np.ndarray, Parity]:
    """The two products whose difference is W_q, on the whole window."""
    q = y1.lattice.q
    if Parity.GENERAL in (y1.parity, y2.parity):
        x = y1.lattice.points
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (1 - q) * x
            t1 = y2.values * shift(y1, "forward").values / d
            t2 = y1.values * shift(y2, "forward").values / d
        t1[y1.lattice.zero_index] = np.nan
        t2[y1.lattice.zero_index] = np.nan
        return t1, t2, Parity.GENERAL

    if y1.parity == Parity.ODD and y2.parity == Parity.EVEN:
        t1, t2, parity = _terms(y2, y1)
        return t2, t1, parity

    d1, d2 = rubin_derivative(y1), rubin_derivative(y2)
    if y1.parity == Parity.EVEN and y2.parity == Parity.ODD:
        return y1.values * d2.values, q * y2.values * shift(d1, "forward").values, Parity.EVEN
    if y1.parity == Parity.ODD:
        return y1.values * d2.values, y2.values * d1.values, Parity.ODD
    return (
        q * y1.values * shift(d2, "forward").values,
        q * y2.values * shift(d1, "forward").values,
        Parity.ODD,
    )


def _fill_zero(lat, values: np.ndarray, parity: Parity) -> LatticeFn:
    """Set W_q(0): 0 for odd W_q, otherwise the ring limit when it stabilizes."""
    values = np.array(values, dtype=complex)
    zero = lat.zero_index
    if parity == Parity.ODD:
        values[zero] = 0
        return LatticeFn(lattice=lat, values=values, parity=parity)
    values[zero] = np.nan
    w = LatticeFn(lattice=lat, values=values, parity=parity)
    estimate, error = estimate_zero_limit(w)
    if np.isfinite(estimate) and error <= REGULARITY_TOL * max(1.0, abs(estimate)):
        values[zero] = estimate
        return LatticeFn(lattice=lat, values=values, parity=parity)
    logger.debug(f"W_q(0) did not stabilize (error {error:.3g})")
    return LatticeFn(lattice=lat, values=values, parity=parity, q_regular=False)


def wronskian_fn(y1: LatticeFn, y2: LatticeFn) -> LatticeFn:
    """W_q(y1, y2) sampled over the window.

    Uses the parity formulas when both parities are declared, otherwise the
    ratio form. W_q(0) comes from the ring limit.
    """
    if y1.lattice != y2.lattice:
        raise DomainError("functions live on different lattices")
    t1, t2, parity = _terms(y1, y2)
    return _fill_zero(y1.lattice, t1 - t2, parity)


def dq_wq(y1: LatticeFn, y2: LatticeFn, x: float) -> complex:
    """∂_q W_q(y1, y2)(x) from second derivatives:

    opposite parity (even y1): y1(x) ∂²y2(x) - q y2(x) ∂²y1(x)
    (odd, odd):   q [y1(qx) ∂²y2(qx) - y2(qx) ∂²y1(qx)]
    (even, even): q² [y1(qx) ∂²y2(qx) - y2(qx) ∂²y1(qx)]
    """
    _require_parity(y1, y2)
    if y1.parity == Parity.ODD and y2.parity == Parity.EVEN:
        return -dq_wq(y2, y1, x)
    lat = y1.lattice
    q = lat.q
    sign, k = lat.locate(x)
    if sign == 0:
        raise DomainError("dq_wq is evaluated at x != 0")
    dd1, dd2 = rubin_derivative_n(y1, 2), rubin_derivative_n(y2, 2)
    if y1.parity != y2.parity:
        return y1.value(sign, k) * dd2.value(sign, k) - q * y2.value(sign, k) * dd1.value(sign, k)
    bracket = y1.value(sign, k + 1) * dd2.value(sign, k + 1) - y2.value(sign, k + 1) * dd1.value(sign, k + 1)
    return (q if y1.parity == Parity.ODD else q * q) * bracket


def abel_E(s: SecondOrderSpec, x) -> complex:
    """E(x) = (a1(x) + x(1-q) a2(x)) / a0(x); arrays are accepted.

    Raises:
        DomainError: a0(x) = 0.
    """
    q = s.q
    xs = np.asarray(x, dtype=float)
    a0 = eval_coefficient(s.a0, xs)
    if np.any(a0 == 0):
        raise DomainError(f"a0 vanishes at x={x}")
    E = (eval_coefficient(s.a1, xs) + xs * (1 - q) * eval_coefficient(s.a2, xs)) / a0
    return complex(E) if E.ndim == 0 else E


def branch_scale(branch: Parity, q: float) -> float:
    """The factor c in W(qx) = (1 + c(1-q) x E(x)) W(x)."""
    return q if Parity(branch) == Parity.EVEN else 1.0


def abel_factors(s: SecondOrderSpec, x: float, n: int, scale: float = 1.0) -> np.ndarray:
    """1 + scale * x(1-q) q^k E(x q^k) for k = 0..n-1."""
    q = s.q
    pts = x * q ** np.arange(n, dtype=float)
    return 1 + scale * pts * (1 - q) * abel_E(s, pts)


def abel_residuals(s: SecondOrderSpec, w: LatticeFn, scale: float = 1.0) -> LatticeFn:
    """|W(qx) - (1 + scale x(1-q) E(x)) W(x)| at every point where both values exist."""
    lat = w.lattice
    q = lat.q
    x = lat.points
    factor = 1 + scale * x * (1 - q) * abel_E(s, x)
    gap = np.abs(shift(w, "forward").values - factor * w.values)
    gap[lat.zero_index] = np.nan
    return w.with_values(gap, Parity.GENERAL)


def _max_finite(f: LatticeFn) -> float:
    v = f.values[np.isfinite(f.values)]
    return float(np.max(np.abs(v))) if v.size else 0.0


def abel_residual(s: SecondOrderSpec, y1: LatticeFn, y2: LatticeFn, scale: Optional[float] = None) -> float:
    """Largest violation of the one-step Abel recurrence on the window.

    scale defaults to the branch factor of a same-parity pair; for opposite
    parities the scale-1 recurrence is reported as a diagnostic.
    """
    if scale is None:
        scale = branch_scale(y1.parity, s.q) if y1.parity == y2.parity else 1.0
    return _max_finite(abel_residuals(s, wronskian_fn(y1, y2), scale))


def _liouville_product(s: SecondOrderSpec, x: float, n_factors: Optional[int], scale: float) -> complex:
    ctx = s.ctx
    if x == 0:
        return 1.0 + 0j
    if n_factors is None:
        n = 64
        while True:
            factors = abel_factors(s, x, n + 1, scale)
            below = np.flatnonzero(np.abs(factors - 1) < ctx.series_tol)
            if below.size:
                n = int(below[0])
                break
            if n >= ctx.max_terms:
                raise TailNotNegligible(
                    f"Liouville factors at x={x} not negligible within {ctx.max_terms} terms", tail="product"
                )
            n = min(2 * n, ctx.max_terms)
    else:
        n = n_factors
        factors = abel_factors(s, x, n + 1, scale)
        deviation = abs(factors[n] - 1)
        if deviation >= ctx.series_tol:
            raise TailNotNegligible(
                f"Liouville factor {n} deviates by {deviation:.3g} at x={x}",
                tail="product",
                bound=float(deviation),
            )
    used = factors[:n]
    if np.any(np.abs(used) < np.finfo(float).eps):
        k = int(np.argmin(np.abs(used)))
        raise SingularFactor(f"factor 1 + x(1-q)q^k E(xq^k) vanishes for x={x}, k={k}")
    return complex(np.prod(used))


def liouville_wq(
    s: SecondOrderSpec,
    w0: complex,
    x: float,
    n_factors: Optional[int] = None,
    scale: float = 1.0,
) -> complex:
    """W_q(0) / Π_{k<n} (1 + scale x(1-q) q^k E(x q^k)).

    Without n_factors, factors are taken until their deviation from 1 drops
    below series_tol.

    Raises:
        SingularFactor: a factor vanishes.
        TailNotNegligible: factor n_factors is not within series_tol of 1.
    """
    return complex(w0) / _liouville_product(s, x, n_factors, scale)


def ring_limits(w: LatticeFn) -> Dict[int, complex]:
    """One-sided limits W(0±) from each ring; NaN when they do not stabilize.

    An odd W_q of a same-branch pair may jump at 0, so the Liouville product
    is anchored to the limit on its own side.
    """
    lat = w.lattice
    limits = {}
    for sign in (1, -1):
        estimate, error = extrapolate_to_zero(w.ring(sign), lat.radii, lat.q)
        stable = np.isfinite(estimate) and error <= REGULARITY_TOL * max(1.0, abs(estimate))
        limits[sign] = estimate if stable else complex(np.nan)
    return limits


def liouville_residuals(s: SecondOrderSpec, w: LatticeFn, scale: float = 1.0) -> LatticeFn:
    """|W(x) - W(0±)/Π(...)| on the window; missing where the limit is unknown."""
    lat = w.lattice
    limits = ring_limits(w)
    gap = np.full(len(lat), np.nan)
    for i, x in enumerate(lat.points):
        if x == 0 or not np.isfinite(w.values[i]):
            continue
        w0 = limits[1 if x > 0 else -1]
        if np.isfinite(w0):
            gap[i] = abs(w.values[i] - liouville_wq(s, w0, float(x), scale=scale))
    return w.with_values(gap, Parity.GENERAL)


def is_fundamental(y1: LatticeFn, y2: LatticeFn, fundamental_tol: Optional[float] = None) -> bool:
    """True iff |W_q(0)| exceeds fundamental_tol.

    The default tolerance is 1e-8 times the largest of the two Wronskian
    products over the window.

    Raises:
        NotQRegular: W_q(0) cannot be extrapolated.
    """
    t1, t2, parity = _terms(y1, y2)
    w = _fill_zero(y1.lattice, t1 - t2, parity)
    w0 = w.value_at_zero
    if not np.isfinite(w0):
        raise NotQRegular("W_q(0) did not stabilize")
    if fundamental_tol is None:
        products = np.concatenate([t1, t2])
        products = np.abs(products[np.isfinite(products)])
        fundamental_tol = FUNDAMENTAL_REL_TOL * (float(np.max(products)) if products.size else 0.0)
    result = abs(w0) > fundamental_tol
    logger.debug(f"|W_q(0)|={abs(w0):.3g}, tolerance {fundamental_tol:.3g}: fundamental={result}")
    return bool(result)


def wronskian_report(
    s: SecondOrderSpec,
    y1: LatticeFn,
    y2: LatticeFn,
    fundamental_tol: Optional[float] = None,
) -> WronskianReport:
    w = wronskian_fn(y1, y2)
    lat = w.lattice
    scale = branch_scale(y1.parity, s.q) if y1.parity == y2.parity else 1.0
    E_values = {float(x): complex(e) for x, e in zip(lat.points, abel_E(s, lat.points)) if x != 0}
    try:
        fundamental = is_fundamental(y1, y2, fundamental_tol)
    except NotQRegular:
        fundamental = False
    liouville = liouville_residuals(s, w, scale)
    has_limit = bool(np.any(np.isfinite(liouville.values)))
    return WronskianReport(
        w_values=w,
        E_values=E_values,
        abel_residual=_max_finite(abel_residuals(s, w, scale)),
        liouville_residual=_max_finite(liouville) if has_limit else math.nan,
        fundamental=fundamental,
        w0=w.value_at_zero,
    )


def ray_solution(s: SecondOrderSpec, branch: Parity, y_inner: complex, y_next: complex) -> LatticeFn:
    """Homogeneous branch solution built outwards from its two innermost ring
    values, extended to the negative ring with the branch parity.

    The recurrence holds on the positive ring; on the negative ring only when
    x E(x) is even.

    odd:  R y(x) = ((1+q)a0 + (1-q)qx a1) y(qx) - a0 y(q²x),
          R = q a0 + (1-q)qx a1 + (1-q)²qx² a2
    even: R y(x) = ((1+q)a0 + q²(1-q)x a1) y(qx) - a0 y(q²x),
          R = q a0 + q²(1-q)x a1 + q²(1-q)²x² a2

    Raises:
        SingularFactor: R vanishes at some ring.
    """
    branch = Parity(branch)
    if branch == Parity.GENERAL:
        raise ParityError("branch must be even or odd")
    lat = s.lattice
    q = lat.q
    radii = lat.radii
    a0 = eval_coefficient(s.a0, radii)
    a1 = eval_coefficient(s.a1, radii)
    a2 = eval_coefficient(s.a2, radii)
    if branch == Parity.ODD:
        P = (1 + q) * a0 + (1 - q) * q * radii * a1
        R = q * a0 + (1 - q) * q * radii * a1 + (1 - q) ** 2 * q * radii ** 2 * a2
    else:
        P = (1 + q) * a0 + q ** 2 * (1 - q) * radii * a1
        R = q * a0 + q ** 2 * (1 - q) * radii * a1 + q ** 2 * (1 - q) ** 2 * radii ** 2 * a2

    n = lat.rings
    if n < 2:
        raise DomainError("ray solutions need at least two rings")
    pos = np.empty(n, dtype=complex)
    pos[n - 1] = y_inner
    pos[n - 2] = y_next
    for i in range(n - 3, -1, -1):
        if R[i] == 0:
            raise SingularFactor(f"recurrence denominator vanishes at x={radii[i]:.17g}")
        pos[i] = (P[i] * pos[i + 1] - a0[i] * pos[i + 2]) / R[i]
    neg = pos.copy() if branch == Parity.EVEN else -pos
    zero = np.nan if branch == Parity.EVEN else 0j
    return LatticeFn.from_rings(lat, pos, neg, zero, branch, q_regular=False)
