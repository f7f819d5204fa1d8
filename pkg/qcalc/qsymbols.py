"""
Basic q-symbols: shifted factorials, q-numbers, q-factorials and Gauss
binomial coefficients, together with the QContext every other module takes.
"""

from __future__ import annotations

import math
import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from qcalc.config import Settings, DEFAULT_MAX_TERMS, DEFAULT_SERIES_TOL, load_settings
from qcalc.errors import DomainError, TruncationNotConverged

logger = logging.getLogger(__name__)


class QContext(BaseModel):
    """The deformation parameter q with the truncation controls.

    Construction rejects q outside the open interval (0, 1).
    """

    model_config = ConfigDict(frozen=True)

    q: float = Field(gt=0, lt=1)
    series_tol: float = Field(default=DEFAULT_SERIES_TOL, gt=0)
    max_terms: int = Field(default=DEFAULT_MAX_TERMS, ge=1)

    @classmethod
    def from_settings(cls, q: float, settings: Optional[Settings] = None) -> "QContext":
        settings = settings or load_settings()
        return cls(q=q, series_tol=settings.series_tol, max_terms=settings.max_terms)

    @property
    def spectral_condition_met(self) -> bool:
        """True when ln(1-q)/ln(q) lies within 1e-9 of an even integer."""
        r = math.log(1 - self.q) / math.log(self.q)
        return abs(r / 2 - round(r / 2)) * 2 < 1e-9

    def with_q(self, q: float) -> "QContext":
        return QContext(q=q, series_tol=self.series_tol, max_terms=self.max_terms)


def q_pochhammer(a: complex, n: int, ctx: QContext) -> complex:
    """(a; q)_n = prod_{k<n} (1 - a q^k); 1 for n = 0."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    result = 1.0 + 0j
    qk = 1.0
    for _ in range(n):
        result *= 1 - a * qk
        qk *= ctx.q
    return result


def q_pochhammer_inf(a: complex, ctx: QContext) -> complex:
    """(a; q)_inf truncated once |a q^k| drops below series_tol.

    Raises:
        TruncationNotConverged: max_terms factors were used and the next
            factor still differs from 1 by at least series_tol.
    """
    result = 1.0 + 0j
    term = complex(a)
    for _ in range(ctx.max_terms):
        if abs(term) < ctx.series_tol:
            return result
        result *= 1 - term
        term *= ctx.q
    if abs(term) < ctx.series_tol:
        return result
    raise TruncationNotConverged(
        f"(a; q)_inf with a={a} did not converge in {ctx.max_terms} factors"
    )


def q_bracket(n: int, ctx: QContext) -> float:
    """[n]_q = (1 - q^n)/(1 - q)."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return (1 - ctx.q ** n) / (1 - ctx.q)


def bracket_factorial(n: int, base: float) -> float:
    """prod_{m=1}^{n} (1 - base^m)/(1 - base) for any base != 1.

    Used with base = 1/q, which QContext does not admit.
    """
    if base == 1:
        return float(math.factorial(n))
    result = 1.0
    for m in range(1, n + 1):
        result *= (1 - base ** m) / (1 - base)
    return result


def q_factorial(n: int, ctx: QContext) -> float:
    """[n]_q! = [1]_q [2]_q ... [n]_q."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    return bracket_factorial(n, ctx.q)


def q_binomial(n: int, k: int, ctx: QContext) -> float:
    """Gauss binomial coefficient [n choose k]_q."""
    if k < 0 or n < 0:
        raise DomainError(f"negative arguments n={n}, k={k}")
    if k > n:
        raise DomainError(f"k={k} exceeds n={n}")
    k = min(k, n - k)
    q = ctx.q
    result = 1.0
    for j in range(1, k + 1):
        result *= (1 - q ** (n - k + j)) / (1 - q ** j)
    return result
