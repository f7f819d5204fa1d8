"""
q-trigonometric and q-exponential functions built on the coefficients

    b_n(x, q^2) = q^(m(m+1)) x^n / [n]_q!,   m = floor(n/2).

All functions are entire; the series are summed in one forward pass using the
ratio b_(n+1)/b_n so neither x^n nor [n]_q! is formed on its own.
"""

from __future__ import annotations

import math
import logging
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from qcalc.errors import DomainError, TruncationNotConverged
from qcalc.qsymbols import QContext, q_bracket, q_factorial

logger = logging.getLogger(__name__)


def b_coeff(n: int, x: complex, ctx: QContext) -> complex:
    """b_n(x, q^2) = q^(m(m+1)) x^n / [n]_q! with m = n // 2."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    m = n // 2
    return ctx.q ** (m * (m + 1)) * complex(x) ** n / q_factorial(n, ctx)


def _b_ratio(n: int, x: complex, ctx: QContext) -> complex:
    """b_(n+1) / b_n."""
    ratio = x / q_bracket(n + 1, ctx)
    if n % 2 == 1:
        ratio *= ctx.q ** (n + 1)
    return ratio


def _b_sums(x: complex, ctx: QContext) -> Tuple[complex, complex, complex, complex]:
    """One pass over b_n(x): (Σ(-1)^n b_2n, Σ(-1)^n b_2n+1, Σ b_2n, Σ b_2n+1).

    Raises:
        TruncationNotConverged: max_terms terms were summed and the last two
            were not negligible.
    """
    x = complex(x)
    cos_s = sin_s = cosh_s = sinh_s = 0j
    term = 1.0 + 0j
    small = 0
    for n in range(ctx.max_terms):
        if n % 2 == 0:
            cos_s += term if n % 4 == 0 else -term
            cosh_s += term
        else:
            sin_s += term if n % 4 == 1 else -term
            sinh_s += term
        scale = 1 + abs(cosh_s) + abs(sinh_s)
        small = small + 1 if abs(term) < ctx.series_tol * scale else 0
        if small >= 2:
            return cos_s, sin_s, cosh_s, sinh_s
        term *= _b_ratio(n, x, ctx)
    raise TruncationNotConverged(
        f"b_n series at x={x} not converged after {ctx.max_terms} terms"
    )


def q_trig(x: complex, ctx: QContext) -> Tuple[complex, complex, complex]:
    """(cos(x,q^2), sin(x,q^2), e(x,q^2)) from a single pass."""
    c, s, ch, sh = _b_sums(x, ctx)
    return c, s, ch + sh


def q_cos(x: complex, ctx: QContext) -> complex:
    """cos(x, q^2) = Σ (-1)^n b_2n(x, q^2)."""
    return _b_sums(x, ctx)[0]


def q_sin(x: complex, ctx: QContext) -> complex:
    """sin(x, q^2) = Σ (-1)^n b_2n+1(x, q^2)."""
    return _b_sums(x, ctx)[1]


def q_exp(x: complex, ctx: QContext) -> complex:
    """e(x, q^2) = Σ b_n(x, q^2) = cos(-ix, q^2) + i sin(-ix, q^2)."""
    _, _, ch, sh = _b_sums(x, ctx)
    return ch + sh


def q_cosh(x: complex, ctx: QContext) -> complex:
    """Even part of e(x, q^2)."""
    return _b_sums(x, ctx)[2]


def q_sinh(x: complex, ctx: QContext) -> complex:
    """Odd part of e(x, q^2)."""
    return _b_sums(x, ctx)[3]


class QSeries(BaseModel):
    """Power series Σ a_n x^n with a finite coefficient list.

    radius_hint is the radius inside which the stored coefficients are
    expected to suffice (inf for entire series).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficients: np.ndarray
    radius_hint: float = math.inf

    @field_validator("coefficients", mode="before")
    @classmethod
    def _as_array(cls, v):
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    def __len__(self) -> int:
        return len(self.coefficients)

    def evaluate(self, x: complex, ctx: QContext) -> complex:
        """Partial sum stopped after two consecutive negligible terms.

        Raises:
            TruncationNotConverged: the coefficients ran out (or max_terms was
                reached) while terms were still above series_tol.
        """
        x = complex(x)
        if abs(x) > self.radius_hint:
            logger.warning(f"evaluating series at |x|={abs(x):.3g} beyond radius hint {self.radius_hint:.3g}")
        total = 0j
        power = 1.0 + 0j
        small = 0
        limit = min(len(self.coefficients), ctx.max_terms)
        for n in range(limit):
            term = self.coefficients[n] * power
            total += term
            if self.coefficients[n] != 0:
                small = small + 1 if abs(term) < ctx.series_tol * (1 + abs(total)) else 0
                if small >= 2:
                    return total
            power *= x
        if x == 0 or limit == 0:
            return total
        raise TruncationNotConverged(
            f"series at x={x} not converged within {limit} coefficients"
        )

    def __call__(self, x: complex, ctx: QContext) -> complex:
        return self.evaluate(x, ctx)

    def rubin_derivative(self, ctx: QContext) -> "QSeries":
        """Termwise ∂_q: x^n -> [n]_q x^(n-1) (n odd), q^-n [n]_q x^(n-1) (n even)."""
        a = self.coefficients
        out = np.zeros(max(len(a) - 1, 1), dtype=complex)
        for n in range(1, len(a)):
            factor = q_bracket(n, ctx)
            if n % 2 == 0:
                factor *= ctx.q ** (-n)
            out[n - 1] = a[n] * factor
        return QSeries(coefficients=out, radius_hint=self.radius_hint)


def b_series(ctx: QContext, n_terms: int, signs: Sequence[int] = (1,), parity: str = "all") -> QSeries:
    """Coefficients of cos/sin/e(x, q^2) as a QSeries with n_terms entries.

    parity "even" keeps b_2n, "odd" keeps b_2n+1, "all" keeps every b_n;
    signs cycle over the kept terms ((1, -1) gives the alternating series).
    """
    coeffs = np.zeros(n_terms, dtype=complex)
    kept = 0
    for n in range(n_terms):
        if parity == "even" and n % 2 == 1:
            continue
        if parity == "odd" and n % 2 == 0:
            continue
        coeffs[n] = signs[kept % len(signs)] * b_coeff(n, 1.0, ctx)
        kept += 1
    return QSeries(coefficients=coeffs)
