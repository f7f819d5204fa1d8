"""
Finite windows of the q-geometric set {±q^k} ∪ {0} and complex functions
sampled on them.

Values are stored in a numpy array aligned with the ascending lattice points.
Missing values (points whose neighbours fell outside the window) are NaN;
every read through LatticeFn.value/at rejects them with MissingValue.
"""

from __future__ import annotations

import math
import logging
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from qcalc.config import PARITY_TOL, REGULARITY_TOL, ZERO_PROBE_FLOOR
from qcalc.errors import DomainError, EvaluationError, MissingValue
from qcalc.qsymbols import QContext

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    GENERAL = "general"

    def times(self, other: "Parity") -> "Parity":
        """Parity of a pointwise product."""
        if Parity.GENERAL in (self, other):
            return Parity.GENERAL
        return Parity.EVEN if self == other else Parity.ODD

    def flipped(self) -> "Parity":
        """Parity after one application of the Rubin operator."""
        if self == Parity.EVEN:
            return Parity.ODD
        if self == Parity.ODD:
            return Parity.EVEN
        return Parity.GENERAL


class QLattice(BaseModel):
    """The window {0} ∪ {±q^k : k_min <= k <= k_max}."""

    model_config = ConfigDict(frozen=True)

    ctx: QContext
    k_min: int
    k_max: int

    @model_validator(mode="after")
    def _check_window(self) -> "QLattice":
        if self.k_min > self.k_max:
            raise ValueError(f"k_min={self.k_min} exceeds k_max={self.k_max}")
        return self

    @property
    def q(self) -> float:
        return self.ctx.q

    @property
    def rings(self) -> int:
        return self.k_max - self.k_min + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def radii(self) -> np.ndarray:
        """q^k for k = k_min..k_max (outermost first)."""
        return np.power(self.q, self.ks.astype(float))

    @property
    def points(self) -> np.ndarray:
        r = self.radii
        return np.concatenate([-r, [0.0], r[::-1]])

    @property
    def zero_index(self) -> int:
        return self.rings

    def __len__(self) -> int:
        return 2 * self.rings + 1

    def in_window(self, k: int) -> bool:
        return self.k_min <= k <= self.k_max

    def position(self, sign: int, k: int = 0) -> int:
        """Index into points for the point sign*q^k (sign 0 is the origin)."""
        if sign == 0:
            return self.rings
        if not self.in_window(k):
            raise MissingValue(f"ring k={k} outside window [{self.k_min}, {self.k_max}]")
        i = k - self.k_min
        return i if sign < 0 else 2 * self.rings - i

    def point(self, sign: int, k: int) -> float:
        return 0.0 if sign == 0 else sign * self.q ** k

    def locate(self, x: float) -> Tuple[int, int]:
        """Return (sign, k) with x = sign*q^k, or (0, 0) for the origin."""
        x = complex(x)
        if x.imag != 0:
            raise DomainError(f"lattice points are real, got {x}")
        x = x.real
        if x == 0:
            return 0, 0
        k = int(round(math.log(abs(x)) / math.log(self.q)))
        if not math.isclose(abs(x), self.q ** k, rel_tol=1e-9):
            raise DomainError(f"{x} is not a point of the q-lattice for q={self.q}")
        if not self.in_window(k):
            raise MissingValue(f"{x} lies outside the window [{self.k_min}, {self.k_max}]")
        return (1 if x > 0 else -1), k


def build_lattice(ctx: QContext, k_min: int, k_max: int) -> QLattice:
    """Finite window with 2(k_max - k_min + 1) + 1 points."""
    if k_min > k_max:
        raise DomainError(f"k_min={k_min} exceeds k_max={k_max}")
    return QLattice(ctx=ctx, k_min=k_min, k_max=k_max)


def build_window(ctx: QContext, outer: float, inner: float) -> QLattice:
    """Smallest window whose rings cover inner <= |x| <= outer."""
    if not 0 < inner <= outer:
        raise DomainError(f"need 0 < inner <= outer, got inner={inner}, outer={outer}")
    log_q = math.log(ctx.q)
    k_min = math.floor(math.log(outer) / log_q + 1e-9)
    k_max = math.ceil(math.log(inner) / log_q - 1e-9)
    return build_lattice(ctx, k_min, max(k_min, k_max))


def tail_depth(ctx: QContext, scale: float = 1.0) -> int:
    """Depth k >= 0 with q^(k+1) * scale strictly below series_tol."""
    if scale <= 0:
        return 0
    k = math.ceil(math.log(ctx.series_tol / scale) / math.log(ctx.q)) - 1
    return max(k + 1, 0)


def extrapolate_to_zero(
    values: Sequence[complex], radii: Sequence[float], q: float
) -> Tuple[complex, float]:
    """Richardson step in q^n towards x = 0.

    values are ordered from the outer to the inner ring. Each consecutive
    pair gives (v[i+1] - q v[i])/(1 - q); the pair whose estimate agrees best
    with its inner neighbour is kept. Rings below ZERO_PROBE_FLOOR are skipped,
    rounding dominates difference quotients there.

    Returns:
        (estimate, error estimate); the error is inf with fewer than two rings.
    """
    v = np.asarray(values, dtype=complex)
    r = np.asarray(radii, dtype=float)
    usable = np.isfinite(v) & (r >= ZERO_PROBE_FLOOR)
    v = v[usable]
    if v.size == 0:
        return complex(np.nan), math.inf
    if v.size == 1:
        return complex(v[0]), math.inf

    est = (v[1:] - q * v[:-1]) / (1 - q)
    if est.size == 1:
        return complex(est[0]), float(abs(est[0] - v[-1]))
    err = np.abs(np.diff(est))
    best = int(np.argmin(err))
    return complex(est[best + 1]), float(err[best])


class LatticeFn(BaseModel):
    """A complex function sampled on a QLattice, with declared parity."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    lattice: QLattice
    values: np.ndarray
    parity: Parity = Parity.GENERAL
    q_regular: bool = True

    @field_validator("values", mode="before")
    @classmethod
    def _freeze_values(cls, v):
        arr = np.array(v, dtype=complex)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape(self) -> "LatticeFn":
        if self.values.shape != (len(self.lattice),):
            raise ValueError(
                f"expected {len(self.lattice)} values, got shape {self.values.shape}"
            )
        return self

    @classmethod
    def from_rings(
        cls,
        lattice: QLattice,
        pos: np.ndarray,
        neg: np.ndarray,
        zero: complex,
        parity: Parity = Parity.GENERAL,
        q_regular: bool = True,
    ) -> "LatticeFn":
        """Assemble from ring arrays indexed by k - k_min."""
        pos = np.asarray(pos, dtype=complex)
        neg = np.asarray(neg, dtype=complex)
        values = np.concatenate([neg, [complex(zero)], pos[::-1]])
        return cls(lattice=lattice, values=values, parity=parity, q_regular=q_regular)

    @property
    def ctx(self) -> QContext:
        return self.lattice.ctx

    @property
    def value_at_zero(self) -> complex:
        """The value stored at the origin.

        For sampled functions this is the raw sample f(0). Derived functions
        such as rubin_derivative and jackson_derivative store the limit x -> 0
        there: 0 for odd results, otherwise the extrapolated limit, or NaN
        when it did not stabilize.
        """
        return complex(self.values[self.lattice.zero_index])

    def ring(self, sign: int) -> np.ndarray:
        """Values on the positive or negative ring, indexed by k - k_min."""
        n = self.lattice.rings
        if sign > 0:
            return self.values[n + 1:][::-1].copy()
        return self.values[:n].copy()

    def raw(self, sign: int, k: int = 0) -> complex:
        """Stored value at sign*q^k, NaN when outside the window."""
        if sign != 0 and not self.lattice.in_window(k):
            return complex(np.nan)
        return complex(self.values[self.lattice.position(sign, k)])

    def value(self, sign: int, k: int = 0) -> complex:
        v = self.raw(sign, k)
        if not np.isfinite(v):
            x = self.lattice.point(sign, k)
            raise MissingValue(f"value at x={x!r} (k={k}) is missing")
        return v

    def at(self, x: float) -> complex:
        sign, k = self.lattice.locate(x)
        return self.value(sign, k)

    def __call__(self, x: float) -> complex:
        return self.at(x)

    @property
    def missing(self) -> np.ndarray:
        return ~np.isfinite(self.values)

    def max_abs(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0

    def with_values(self, values: np.ndarray, parity: Optional[Parity] = None) -> "LatticeFn":
        return LatticeFn(
            lattice=self.lattice,
            values=values,
            parity=self.parity if parity is None else parity,
            q_regular=self.q_regular,
        )

    def with_parity(self, parity: Parity) -> "LatticeFn":
        return self.with_values(self.values, parity)

    def _combine(
        self, other: "LatticeFn", op: Callable[[np.ndarray, np.ndarray], np.ndarray], parity: Parity
    ) -> "LatticeFn":
        if other.lattice != self.lattice:
            raise DomainError("functions live on different lattices")
        return LatticeFn(
            lattice=self.lattice,
            values=op(self.values, other.values),
            parity=parity,
            q_regular=self.q_regular and other.q_regular,
        )

    def __add__(self, other):
        if isinstance(other, LatticeFn):
            parity = self.parity if self.parity == other.parity else Parity.GENERAL
            return self._combine(other, np.add, parity)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, LatticeFn):
            parity = self.parity if self.parity == other.parity else Parity.GENERAL
            return self._combine(other, np.subtract, parity)
        return NotImplemented

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, other):
        if isinstance(other, LatticeFn):
            return self._combine(other, np.multiply, self.parity.times(other.parity))
        if isinstance(other, (int, float, complex, np.number)):
            return self.with_values(self.values * other)
        return NotImplemented

    __rmul__ = __mul__

    def map(self, func: Callable[[np.ndarray], np.ndarray], parity: Parity = Parity.GENERAL) -> "LatticeFn":
        """Apply a vectorized function to the stored values."""
        return self.with_values(np.asarray(func(self.values), dtype=complex), parity)

    def restrict(self, radius: float) -> "LatticeFn":
        """Mark values with |x| > radius as missing."""
        outside = np.abs(self.lattice.points) > radius * (1 + 1e-12)
        values = np.where(outside, np.nan, self.values)
        return self.with_values(values)

    def check_parity(self) -> float:
        """Largest violation of the declared parity, relative to max|f|."""
        if self.parity == Parity.GENERAL:
            return 0.0
        pos, neg = self.ring(1), self.ring(-1)
        ok = np.isfinite(pos) & np.isfinite(neg)
        sign = 1 if self.parity == Parity.EVEN else -1
        scale = max(1.0, self.max_abs())
        worst = float(np.max(np.abs(neg[ok] - sign * pos[ok]), initial=0.0))
        if self.parity == Parity.ODD and np.isfinite(self.value_at_zero):
            worst = max(worst, abs(self.value_at_zero))
        return worst / scale

    def to_csv_rows(self) -> List[Tuple[Union[int, str], float, float, float]]:
        """Rows (k, x, re f, im f) in ascending x; the origin uses k = "zero"."""
        rows = []
        lat = self.lattice
        for sign in (-1, 0, 1):
            ks = [0] if sign == 0 else (list(lat.ks) if sign < 0 else list(lat.ks[::-1]))
            for k in ks:
                v = self.raw(sign, int(k))
                label = "zero" if sign == 0 else int(k)
                rows.append((label, lat.point(sign, int(k)), v.real, v.imag))
        return rows


def estimate_zero_limit(f: LatticeFn) -> Tuple[complex, float]:
    """Limit of f(±q^k) as k grows, from both rings."""
    radii = f.lattice.radii
    q = f.lattice.q
    est_pos, err_pos = extrapolate_to_zero(f.ring(1), radii, q)
    est_neg, err_neg = extrapolate_to_zero(f.ring(-1), radii, q)
    if not np.isfinite(est_neg):
        return est_pos, err_pos
    if not np.isfinite(est_pos):
        return est_neg, err_neg
    estimate = (est_pos + est_neg) / 2
    error = max(err_pos, err_neg, abs(est_pos - est_neg) / 2)
    return estimate, error


def _symmetrize(pos: np.ndarray, zero: complex, parity: Parity) -> Tuple[np.ndarray, np.ndarray, complex]:
    if parity == Parity.EVEN:
        return pos, pos.copy(), zero
    return pos, -pos, 0j


def sample(
    expr: Callable[[float], Number],
    lattice: QLattice,
    parity_hint: Parity = Parity.GENERAL,
) -> LatticeFn:
    """Evaluate expr at every lattice point.

    A parity hint that holds to PARITY_TOL (relative to max|f|) is enforced
    exactly on the stored values; otherwise the function is downgraded to
    general parity with a warning.

    Raises:
        EvaluationError: expr raised or returned a non-finite value.
    """
    values = np.empty(len(lattice), dtype=complex)
    for i, x in enumerate(lattice.points):
        try:
            v = complex(expr(float(x)))
        except Exception as e:
            raise EvaluationError(f"expression failed at x={x}: {e}") from e
        if not np.isfinite(v):
            raise EvaluationError(f"expression returned {v} at x={x}")
        values[i] = v

    parity = Parity(parity_hint)
    n = lattice.rings
    neg = values[:n]
    zero = values[n]
    pos = values[n + 1:][::-1]

    if parity != Parity.GENERAL:
        scale = max(1.0, float(np.max(np.abs(values))))
        sign = 1 if parity == Parity.EVEN else -1
        violation = float(np.max(np.abs(neg - sign * pos), initial=0.0))
        if parity == Parity.ODD:
            violation = max(violation, abs(zero))
        if violation > PARITY_TOL * scale:
            logger.warning(
                f"declared {parity.value} parity violated by {violation:.3g}; "
                f"treating function as general"
            )
            parity = Parity.GENERAL
        else:
            pos, neg, zero = _symmetrize(pos, zero, parity)

    inner = max(abs(pos[-1] - zero), abs(neg[-1] - zero))
    q_regular = bool(inner <= REGULARITY_TOL * max(1.0, abs(zero)))
    if not q_regular:
        logger.debug(f"innermost ring differs from f(0) by {inner:.3g}; flagged not q-regular")

    return LatticeFn.from_rings(lattice, pos, neg, zero, parity, q_regular)


def parity_decompose(f: LatticeFn) -> Tuple[LatticeFn, LatticeFn]:
    """Even and odd parts (f(x) ± f(-x))/2."""
    pos, neg = f.ring(1), f.ring(-1)
    even = (pos + neg) / 2
    odd = (pos - neg) / 2
    zero = f.value_at_zero
    lat = f.lattice
    f_e = LatticeFn.from_rings(lat, even, even, zero, Parity.EVEN, f.q_regular)
    f_o = LatticeFn.from_rings(lat, odd, -odd, 0j, Parity.ODD, f.q_regular)
    return f_e, f_o


def shift(f: LatticeFn, direction: str = "forward") -> LatticeFn:
    """forward: x -> f(qx); backward: x -> f(x/q). Points whose image leaves
    the window become missing."""
    nan = np.array([np.nan], dtype=complex)
    pos, neg = f.ring(1), f.ring(-1)
    if direction == "forward":
        pos = np.concatenate([pos[1:], nan])
        neg = np.concatenate([neg[1:], nan])
    elif direction == "backward":
        pos = np.concatenate([nan, pos[:-1]])
        neg = np.concatenate([nan, neg[:-1]])
    else:
        raise DomainError(f"direction must be 'forward' or 'backward', got {direction!r}")
    return LatticeFn.from_rings(f.lattice, pos, neg, f.value_at_zero, f.parity, f.q_regular)


def shift_power(f: LatticeFn, n: int) -> LatticeFn:
    """Λ_q^n: x -> f(q^n x) for any integer n."""
    direction = "forward" if n >= 0 else "backward"
    for _ in range(abs(n)):
        f = shift(f, direction)
    return f
