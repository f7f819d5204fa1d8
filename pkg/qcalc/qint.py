"""
Jackson q-integration on the lattice window: definite and improper sums,
the fundamental-theorem residuals and integration by parts.

A Jackson sum x(1-q) Σ q^n f(q^n x) runs inwards from x until the last
available ring; it is accepted when the geometric tail majorant
q^(k+1)|f(±q^k)| at that ring is below series_tol.
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel

from qcalc.errors import DomainError, MissingValue, ParityError, TailNotNegligible
from qcalc.lattice import LatticeFn, Parity, parity_decompose, shift
from qcalc.qops import rubin_derivative

logger = logging.getLogger(__name__)


class Domain(str, Enum):
    POSITIVE_AXIS = "positive_axis"
    NEGATIVE_AXIS = "negative_axis"
    FULL_LINE = "full_line"


def _tail_bound(q: float, k: int, value: complex) -> float:
    return q ** (k + 1) * abs(value)


def _check_tail(f: LatticeFn, sign: int, k: int, which: str = "small-x") -> None:
    bound = _tail_bound(f.lattice.q, k, f.raw(sign, k))
    if bound > f.ctx.series_tol:
        raise TailNotNegligible(
            f"{which} tail bound {bound:.3g} at ring k={k} exceeds series_tol={f.ctx.series_tol:.3g}",
            tail=which,
            bound=bound,
        )


def _ring_sums(f: LatticeFn, sign: int) -> Tuple[np.ndarray, np.ndarray]:
    """Inward partial sums S[i] = (1-q) Σ_{j=i}^{end(i)} q^j f(±q^j) and the
    index end(i) where the run of available values starting at i stops
    (-1 when f is missing at i)."""
    lat = f.lattice
    q = lat.q
    vals = f.ring(sign)
    terms = (1 - q) * lat.radii * vals
    n = lat.rings
    sums = np.full(n, np.nan, dtype=complex)
    ends = np.full(n, -1, dtype=int)
    for i in range(n - 1, -1, -1):
        if not np.isfinite(vals[i]):
            continue
        if i + 1 < n and ends[i + 1] >= 0:
            sums[i] = terms[i] + sums[i + 1]
            ends[i] = ends[i + 1]
        else:
            sums[i] = terms[i]
            ends[i] = i
    return sums, ends


def _checked_ends(f: LatticeFn, sign: int, ends: np.ndarray) -> None:
    k_min = f.lattice.k_min
    for e in np.unique(ends[ends >= 0]):
        _check_tail(f, sign, int(e) + k_min)


def jackson_integral(f: LatticeFn, x: float) -> complex:
    """∫_0^x f(t) d_qt = x(1-q) Σ q^n f(q^n x), truncated at the window.

    Raises:
        MissingValue: f(x) itself is missing.
        TailNotNegligible: the tail beyond the last available ring is too large.
    """
    lat = f.lattice
    sign, k = lat.locate(x)
    if sign == 0:
        return 0j
    f.value(sign, k)
    q = lat.q
    vals = f.ring(sign)
    i = k - lat.k_min
    total = 0j
    j = i
    while j < lat.rings and np.isfinite(vals[j]):
        total += lat.radii[j] * vals[j]
        j += 1
    _check_tail(f, sign, lat.k_min + j - 1)
    return sign * (1 - q) * total


def jackson_integral_ab(f: LatticeFn, a: float, b: float) -> complex:
    """∫_a^b = ∫_0^b - ∫_0^a."""
    return jackson_integral(f, b) - jackson_integral(f, a)


def integral_fn(f: LatticeFn) -> LatticeFn:
    """x -> ∫_0^x f on every window point where f is available."""
    lat = f.lattice
    rings = {}
    for sign in (1, -1):
        sums, ends = _ring_sums(f, sign)
        _checked_ends(f, sign, ends)
        rings[sign] = sign * sums
    return LatticeFn.from_rings(lat, rings[1], rings[-1], 0j, f.parity.flipped(), f.q_regular)


def integral_to_qx(f: LatticeFn) -> LatticeFn:
    """x -> ∫_0^{qx} f.

    At the innermost available ring the sum is empty and the value is 0 up to
    the same tail bound.
    """
    lat = f.lattice
    rings = {}
    for sign in (1, -1):
        sums, ends = _ring_sums(f, sign)
        _checked_ends(f, sign, ends)
        vals = f.ring(sign)
        out = np.full(lat.rings, np.nan, dtype=complex)
        for i in range(lat.rings):
            if i + 1 < lat.rings and ends[i + 1] >= 0:
                out[i] = sums[i + 1]
            elif np.isfinite(vals[i]):
                out[i] = 0j
        rings[sign] = sign * out
    parity = f.parity.flipped()
    return LatticeFn.from_rings(lat, rings[1], rings[-1], 0j, parity, f.q_regular)


def improper_integral(f: LatticeFn, domain: Domain = Domain.FULL_LINE) -> complex:
    """Bilateral Jackson sums (1-q) Σ_n q^n f(±q^n) over the window.

    The available values on each ring must form one contiguous run; the
    run's innermost ring bounds the small-x tail, its outermost ring the
    large-x tail.

    Raises:
        TailNotNegligible: with tail = "small-x" or "large-x".
    """
    domain = Domain(domain)
    lat = f.lattice
    q = lat.q
    signs = {
        Domain.POSITIVE_AXIS: (1,),
        Domain.NEGATIVE_AXIS: (-1,),
        Domain.FULL_LINE: (1, -1),
    }[domain]

    total = 0j
    for sign in signs:
        vals = f.ring(sign)
        idx = np.flatnonzero(np.isfinite(vals))
        if idx.size == 0:
            raise MissingValue("no available values on the ring")
        if idx[-1] - idx[0] + 1 != idx.size:
            raise MissingValue("available values do not form a contiguous run")
        inner_k = lat.k_min + int(idx[-1])
        outer_k = lat.k_min + int(idx[0])
        _check_tail(f, sign, inner_k, "small-x")
        _check_tail(f, sign, outer_k, "large-x")
        total += (1 - q) * np.sum(lat.radii[idx] * vals[idx])
    return complex(total)


class FtcReport(BaseModel):
    """Largest residuals of the two fundamental-theorem identities."""

    parity: Parity
    derivative_of_integral: float
    integral_of_derivative: float

    @property
    def max_residual(self) -> float:
        return max(self.derivative_of_integral, self.integral_of_derivative)


def _max_gap(a: LatticeFn, b: LatticeFn) -> float:
    gap = np.abs(a.values - b.values)
    gap[a.lattice.zero_index] = np.nan
    gap = gap[np.isfinite(gap)]
    return float(np.max(gap)) if gap.size else 0.0


def ftc_check(f: LatticeFn) -> FtcReport:
    """Residuals of the fundamental theorems of ∂_q-calculus.

    odd f:  ∂_q ∫_0^x f = q^-1 f(x/q)   and   ∫_0^x ∂_q f = f(x) - f(0)
    even f: ∂_q ∫_0^x f = f(x)          and   ∫_0^x ∂_q f = f(x/q) - f(0)

    Raises:
        ParityError: f has general parity.
    """
    if f.parity == Parity.GENERAL:
        raise ParityError("ftc_check needs an even or odd function")
    q = f.lattice.q
    f0 = f.value_at_zero
    outer = shift(f, "backward")

    d_int = rubin_derivative(integral_fn(f))
    int_d = integral_fn(rubin_derivative(f))
    if f.parity == Parity.ODD:
        expected_d_int = outer * (1 / q)
        expected_int_d = f.map(lambda v: v - f0)
    else:
        expected_d_int = f
        expected_int_d = outer.map(lambda v: v - f0)

    report = FtcReport(
        parity=f.parity,
        derivative_of_integral=_max_gap(d_int, expected_d_int),
        integral_of_derivative=_max_gap(int_d, expected_int_d),
    )
    logger.debug(f"ftc residuals: {report}")
    return report


def ibp_residual(f: LatticeFn, g: LatticeFn, a: float) -> complex:
    """LHS - RHS of q-integration by parts on [-a, a]:

    ∫_{-a}^{a} ∂f·g = 2[f_e(a/q) g_o(a) + f_o(a) g_e(a/q)] - ∫_{-a}^{a} f·∂g
    """
    lat = f.lattice
    sign, k = lat.locate(a)
    if sign <= 0:
        raise DomainError(f"a must be a positive lattice point, got {a}")
    f_e, f_o = parity_decompose(f)
    g_e, g_o = parity_decompose(g)
    boundary = 2 * (f_e.value(1, k - 1) * g_o.value(1, k) + f_o.value(1, k) * g_e.value(1, k - 1))
    lhs = jackson_integral_ab(rubin_derivative(f) * g, -a, a)
    rhs = boundary - jackson_integral_ab(f * rubin_derivative(g), -a, a)
    return lhs - rhs
