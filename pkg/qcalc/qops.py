"""
Difference operators on the q-lattice: the Jackson derivative D_q, Rubin's
operator ∂_q, their iterates and the parity-specific product rules.

Pointwise operations take a lattice point x; the *_derivative functions
transform a whole LatticeFn at once and leave the rings whose neighbours fall
outside the window missing.
"""

from __future__ import annotations

import logging
from typing import Tuple, Union

import numpy as np

from qcalc.config import REGULARITY_TOL
from qcalc.errors import DomainError, NotQRegular, ParityError
from qcalc.lattice import (
    LatticeFn,
    Parity,
    estimate_zero_limit,
    extrapolate_to_zero,
    parity_decompose,
)
from qcalc.qsymbols import q_binomial

logger = logging.getLogger(__name__)


def _nonzero_point(f: LatticeFn, x: float) -> Tuple[int, int, float]:
    sign, k = f.lattice.locate(x)
    if sign == 0:
        raise DomainError("x = 0 needs the limit form of the operator")
    return sign, k, f.lattice.point(sign, k)


def _stabilized(estimate: complex, error: float) -> bool:
    return np.isfinite(estimate) and error <= REGULARITY_TOL * max(1.0, abs(estimate))


def _pad_inner(ring: np.ndarray) -> np.ndarray:
    """ring shifted one step inwards: result[i] = ring[i + 1]."""
    return np.concatenate([ring[1:], [np.nan]])


def _pad_outer(ring: np.ndarray) -> np.ndarray:
    """ring shifted one step outwards: result[i] = ring[i - 1]."""
    return np.concatenate([[np.nan], ring[:-1]])


def _with_zero_limit(f: LatticeFn, pos: np.ndarray, neg: np.ndarray, parity: Parity) -> LatticeFn:
    partial = LatticeFn.from_rings(f.lattice, pos, neg, np.nan, parity, f.q_regular)
    estimate, error = estimate_zero_limit(partial)
    if parity == Parity.ODD:
        return LatticeFn.from_rings(f.lattice, pos, neg, 0j, parity, f.q_regular)
    if _stabilized(estimate, error):
        return LatticeFn.from_rings(f.lattice, pos, neg, estimate, parity, f.q_regular)
    logger.debug(f"derivative limit at zero did not stabilize (error {error:.3g})")
    return LatticeFn.from_rings(f.lattice, pos, neg, np.nan, parity, False)


# Jackson derivative

def jackson_dq(f: LatticeFn, x: float) -> complex:
    """D_q f(x) = (f(x) - f(qx)) / ((1-q)x) for x != 0."""
    sign, k, xv = _nonzero_point(f, x)
    q = f.lattice.q
    return (f.value(sign, k) - f.value(sign, k + 1)) / ((1 - q) * xv)


def jackson_derivative(f: LatticeFn) -> LatticeFn:
    """D_q f on the whole window; the innermost ring is missing."""
    q = f.lattice.q
    r = f.lattice.radii
    pos, neg = f.ring(1), f.ring(-1)
    d_pos = (pos - _pad_inner(pos)) / ((1 - q) * r)
    d_neg = (neg - _pad_inner(neg)) / (-(1 - q) * r)
    return _with_zero_limit(f, d_pos, d_neg, f.parity.flipped())


def jackson_dq_zero(f: LatticeFn, probe: float, return_error: bool = False) -> Union[complex, Tuple[complex, float]]:
    """lim (f(q^n x) - f(0)) / (q^n x), extrapolated over the rings inside probe.

    Raises:
        NotQRegular: f(0) is unknown or the quotients do not stabilize.
    """
    sign, k, _ = _nonzero_point(f, probe)
    f0 = f.value_at_zero
    if not np.isfinite(f0):
        raise NotQRegular("f(0) is missing")
    lat = f.lattice
    start = k - lat.k_min
    radii = lat.radii[start:]
    vals = f.ring(sign)[start:]
    quotients = (vals - f0) / (sign * radii)
    estimate, error = extrapolate_to_zero(quotients, radii, lat.q)
    if not _stabilized(estimate, error):
        raise NotQRegular(f"D_q f(0) did not stabilize (error estimate {error:.3g})")
    logger.debug(f"D_q f(0) = {estimate} +/- {error:.2g}")
    return (estimate, error) if return_error else estimate


def jackson_dq_n(f: LatticeFn, x: float, n: int) -> complex:
    """D_q^n f(x) through the alternating q-binomial sum over f(q^(n-k) x)."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    sign, k, xv = _nonzero_point(f, x)
    if n == 0:
        return f.value(sign, k)
    ctx = f.ctx
    q = ctx.q
    total = 0j
    for j in range(n + 1):
        weight = (-1) ** j * q_binomial(n, j, ctx) * q ** (j * (j - 1) // 2)
        total += weight * f.value(sign, k + n - j)
    prefactor = (-1) ** n * q ** (-n * (n - 1) / 2) / ((1 - q) ** n * xv ** n)
    return prefactor * total


# Rubin operator

def rubin_dq(f: LatticeFn, x: float) -> complex:
    """Five-point Rubin operator
    [f(x/q) + f(-x/q) - f(qx) + f(-qx) - 2 f(-x)] / (2(1-q)x), x != 0."""
    sign, k, xv = _nonzero_point(f, x)
    q = f.lattice.q
    numerator = (
        f.value(sign, k - 1)
        + f.value(-sign, k - 1)
        - f.value(sign, k + 1)
        + f.value(-sign, k + 1)
        - 2 * f.value(-sign, k)
    )
    return numerator / (2 * (1 - q) * xv)


def rubin_parity_form(f: LatticeFn, x: float) -> complex:
    """∂_q f(x) as (f_e(x/q) - f_e(x))/((1-q)x) + (f_o(x) - f_o(qx))/((1-q)x)."""
    sign, k, xv = _nonzero_point(f, x)
    q = f.lattice.q
    f_e, f_o = parity_decompose(f)
    even = f_e.value(sign, k - 1) - f_e.value(sign, k)
    odd = f_o.value(sign, k) - f_o.value(sign, k + 1)
    return (even + odd) / ((1 - q) * xv)


def rubin_derivative(f: LatticeFn) -> LatticeFn:
    """∂_q f on the whole window.

    The outermost and innermost rings are missing; the origin carries the
    extrapolated limit when it stabilizes.
    """
    q = f.lattice.q
    r = f.lattice.radii
    P, N = f.ring(1), f.ring(-1)
    P_out, N_out = _pad_outer(P), _pad_outer(N)
    P_in, N_in = _pad_inner(P), _pad_inner(N)
    d_pos = (P_out + N_out - P_in + N_in - 2 * N) / (2 * (1 - q) * r)
    d_neg = (N_out + P_out - N_in + P_in - 2 * P) / (-2 * (1 - q) * r)
    return _with_zero_limit(f, d_pos, d_neg, f.parity.flipped())


def rubin_dq_zero(f: LatticeFn, probe: float, return_error: bool = False) -> Union[complex, Tuple[complex, float]]:
    """lim_{x->0} ∂_q f(x), extrapolated over the rings inside probe.

    Raises:
        NotQRegular: the ring values do not stabilize.
    """
    sign, k, _ = _nonzero_point(f, probe)
    lat = f.lattice
    start = k - lat.k_min
    d = rubin_derivative(f).ring(sign)[start:]
    estimate, error = extrapolate_to_zero(d, lat.radii[start:], lat.q)
    if not _stabilized(estimate, error):
        raise NotQRegular(f"∂_q f(0) did not stabilize (error estimate {error:.3g})")
    logger.debug(f"∂_q f(0) = {estimate} +/- {error:.2g}")
    return (estimate, error) if return_error else estimate


def rubin_derivative_n(f: LatticeFn, n: int) -> LatticeFn:
    """n-fold ∂_q; each level loses one ring at both ends of the window."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    for _ in range(n):
        f = rubin_derivative(f)
    return f


def rubin_dq_n(f: LatticeFn, x: float, n: int) -> complex:
    """∂_q^n f(x); at x = 0 the extrapolated limit of the last level."""
    return rubin_derivative_n(f, n).at(x)


def rubin_via_parity(f: LatticeFn, x: float, n: int) -> complex:
    """∂_q^n f(x) from Jackson iterates of the even and odd parts.

    n = 2m:   q^(-m(m+1)) D^n f_e(q^-m x)     + q^(-m^2)   D^n f_o(q^-m x)
    n = 2m+1: q^(-(m+1)^2) D^n f_e(q^-(m+1) x) + q^(-m(m+1)) D^n f_o(q^-m x)
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    sign, k, _ = _nonzero_point(f, x)
    if n == 0:
        return f.value(sign, k)
    q = f.lattice.q
    lat = f.lattice
    f_e, f_o = parity_decompose(f)
    m = n // 2
    if n % 2 == 0:
        e_exp, e_shift = m * (m + 1), m
        o_exp, o_shift = m * m, m
    else:
        e_exp, e_shift = (m + 1) ** 2, m + 1
        o_exp, o_shift = m * (m + 1), m
    even = jackson_dq_n(f_e, lat.point(sign, k - e_shift), n)
    odd = jackson_dq_n(f_o, lat.point(sign, k - o_shift), n)
    return q ** (-e_exp) * even + q ** (-o_exp) * odd


def rubin_product(f: LatticeFn, g: LatticeFn, x: float) -> complex:
    """∂_q(fg)(x) by the product rule matching the declared parities.

    even f, odd g:  f(x) ∂g(x) + q g(qx) ∂f(qx)
    even f, even g: g(x/q) ∂f(x) + f(x) ∂g(x)
    odd f, odd g:   q^-1 g(x/q) ∂f(x/q) + q^-1 f(x) ∂g(x/q)
    """
    if Parity.GENERAL in (f.parity, g.parity):
        raise ParityError("product rule needs declared even/odd parity for both factors")
    if f.parity == Parity.ODD and g.parity == Parity.EVEN:
        f, g = g, f
    sign, k, _ = _nonzero_point(f, x)
    lat = f.lattice
    q = lat.q
    here = lat.point(sign, k)
    outer = lat.point(sign, k - 1)
    inner = lat.point(sign, k + 1)

    if f.parity == Parity.EVEN and g.parity == Parity.ODD:
        return f.value(sign, k) * rubin_dq(g, here) + q * g.value(sign, k + 1) * rubin_dq(f, inner)
    if f.parity == Parity.EVEN:
        return g.value(sign, k - 1) * rubin_dq(f, here) + f.value(sign, k) * rubin_dq(g, here)
    return (g.value(sign, k - 1) * rubin_dq(f, outer) + f.value(sign, k) * rubin_dq(g, outer)) / q
