"""
Initial value problems ∂_q y = f(x, y), y(0) = y0 on the q-lattice.

The Picard operator

    T y(x) = y0 + ∫_0^x g_e(t) d_qt + ∫_0^{qx} g_o(t) d_qt,   g = f(., y(.)),

satisfies ∂_q T y = g on the lattice, so its fixed point solves the problem.
It is iterated on [-h, h] with h = min{α, β/(Lβ+M), ρ/L}, where L and M are
sampled estimates of the Lipschitz constant and the bound of f.

Second-order linear equations

    odd branch:  a0(x)∂²y(qx) + q^-1 a1(x)∂y(x)  + q^-1 a2(x)y(x) = q^-1 b(x)
    even branch: a0(x)∂²y(qx) +      a1(x)∂y(qx) + q^-1 a2(x)y(x) = q^-1 b(x)

are reduced to first-order systems in (y, ∂_q y), solved per branch and
superposed.
"""

from __future__ import annotations

import math
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from qcalc.config import Settings, load_settings
from qcalc.errors import (
    DomainError,
    EvaluationError,
    MaxIterations,
    NotContracting,
    ParityError,
)
from qcalc.lattice import LatticeFn, Parity, QLattice, build_lattice, parity_decompose, shift, tail_depth
from qcalc.qint import integral_fn, integral_to_qx
from qcalc.qops import rubin_derivative
from qcalc.qsymbols import QContext

logger = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray, np.ndarray], np.ndarray]
Coefficient = Callable[[float], complex]

# consecutive non-decreasing increments tolerated before giving up
STALL_LIMIT = 5
# increments below this multiple of eps * scale are rounding noise
NOISE_FACTOR = 32.0
_TINY_L = 1e-300


def _as_complex_vector(v) -> np.ndarray:
    arr = np.atleast_1d(np.array(v, dtype=complex))
    arr.setflags(write=False)
    return arr


class RegionSpec(BaseModel):
    """Rectangle |x| <= alpha, ||y - y0|| <= beta on which f is examined."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: float = Field(gt=0)
    beta: float = Field(gt=0)
    rho: float = Field(ge=0, lt=1)
    y0: np.ndarray

    @field_validator("y0", mode="before")
    @classmethod
    def _vector(cls, v):
        return _as_complex_vector(v)


class FirstOrderProblem(BaseModel):
    """∂_q y = f(x, y), y(0) = y0 on a lattice window.

    f is called with an array of lattice points of shape (N,) and states of
    shape (dim, N) and returns shape (dim, N); scalars broadcast.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: Callable
    region: RegionSpec
    lattice: QLattice
    parity: Tuple[Parity, ...] = ()

    @property
    def y0(self) -> np.ndarray:
        return self.region.y0

    @property
    def dim(self) -> int:
        return len(self.region.y0)


class SecondOrderSpec(BaseModel):
    """Coefficients and initial data of a linear second-order q-IVP.

    Each parity branch of y solves

        odd y:  q a0(x) ∂²y(qx) + a1(x) ∂y(x)    + a2(x) y(x) = b(x)
        even y: q a0(x) ∂²y(qx) + q a1(x) ∂y(qx) + a2(x) y(x) = b(x)

    with y(0) = b1 and ∂_q y(0) = b2. Each branch takes the part of b with
    its own parity.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a0: Callable
    a1: Callable
    a2: Callable
    b: Callable
    b1: complex = 1.0
    b2: complex = 0.0
    lattice: QLattice

    @field_validator("b1", "b2", mode="before")
    @classmethod
    def _complex(cls, v):
        return complex(v)

    @property
    def ctx(self) -> QContext:
        return self.lattice.ctx

    @property
    def q(self) -> float:
        return self.lattice.q

    def with_initial(self, b1: complex, b2: complex) -> "SecondOrderSpec":
        return self.model_copy(update={"b1": complex(b1), "b2": complex(b2)})

    def homogeneous(self) -> "SecondOrderSpec":
        return self.model_copy(update={"b": _zero})


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float), dtype=complex)


class Solution(BaseModel):
    """Converged Picard iterate with its diagnostics.

    components holds y (and ∂_q y for reduced second-order problems) on the
    window [-h_used, h_used]; values outside are missing.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    components: Tuple[LatticeFn, ...]
    iterations: int
    residual: float
    characterization: float = 0.0
    h_used: float
    increments: Tuple[float, ...] = ()
    pointwise_residual: Optional[LatticeFn] = None
    lipschitz: float = math.nan
    bound: float = math.nan
    noise_floor: float = 0.0

    @property
    def y(self) -> LatticeFn:
        return self.components[0]

    @property
    def dy(self) -> LatticeFn:
        if len(self.components) < 2:
            raise DomainError("first-order solution has no derivative component")
        return self.components[1]

    @property
    def contraction_ratios(self) -> List[float]:
        """Ratios of successive increments that are above rounding noise."""
        inc = self.increments
        return [
            inc[i + 1] / inc[i]
            for i in range(len(inc) - 1)
            if inc[i] > self.noise_floor and inc[i + 1] > self.noise_floor
        ]

    def certified(self, rho: float) -> bool:
        return all(r <= rho for r in self.contraction_ratios)


def contraction_radius(L: float, M: float, region: RegionSpec) -> float:
    """h = min{alpha, beta/(L beta + M), rho/L}."""
    if L <= 0:
        raise DomainError(f"Lipschitz constant must be positive, got {L}")
    if M < 0:
        raise DomainError(f"bound M must be nonnegative, got {M}")
    return min(region.alpha, region.beta / (L * region.beta + M), region.rho / L)


def _call_rhs(f: Callable, xs: np.ndarray, Y: np.ndarray) -> np.ndarray:
    try:
        out = f(xs, Y)
        return np.array(np.broadcast_to(np.asarray(out, dtype=complex), Y.shape))
    except Exception as e:
        raise EvaluationError(f"right-hand side failed: {e}") from e


def estimate_lipschitz(
    f: Callable,
    region: RegionSpec,
    samples: int = 256,
    seed: int = 0,
) -> Tuple[float, float]:
    """Sampled lower bounds for L and M in the sum norm.

    Points x are drawn uniformly from [-alpha, alpha], states from the ball
    of radius beta around y0.
    """
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(seed)
    dim = len(region.y0)

    def draw() -> np.ndarray:
        direction = rng.normal(size=(dim, samples)) + 1j * rng.normal(size=(dim, samples))
        direction /= np.sum(np.abs(direction), axis=0)
        radius = region.beta * rng.uniform(0, 1, size=samples)
        return region.y0[:, None] + direction * radius

    xs = rng.uniform(-region.alpha, region.alpha, size=samples)
    Y1, Y2 = draw(), draw()
    F1 = _call_rhs(f, xs, Y1)
    F2 = _call_rhs(f, xs, Y2)
    F0 = _call_rhs(f, xs, np.repeat(region.y0[:, None], samples, axis=1))

    dy = np.sum(np.abs(Y1 - Y2), axis=0)
    df = np.sum(np.abs(F1 - F2), axis=0)
    ok = dy > 0
    L = float(np.max(df[ok] / dy[ok])) if np.any(ok) else 0.0
    M = float(max(np.max(np.sum(np.abs(F), axis=0)) for F in (F0, F1, F2)))
    if not (math.isfinite(L) and math.isfinite(M)):
        raise EvaluationError("right-hand side is not finite on the region")
    return L, M


def _stack(y: Sequence[LatticeFn]) -> np.ndarray:
    return np.vstack([c.values for c in y])


def _rhs_on_lattice(f: Callable, y: Sequence[LatticeFn]) -> List[LatticeFn]:
    lat = y[0].lattice
    Y = _stack(y)
    G = _call_rhs(f, lat.points, Y)
    G[:, ~np.all(np.isfinite(Y), axis=0)] = np.nan
    return [y[0].with_values(G[c], Parity.GENERAL) for c in range(len(y))]


def picard_step(f: Callable, y: Sequence[LatticeFn], y0: Sequence[complex]) -> Tuple[LatticeFn, ...]:
    """T y = y0 + ∫_0^x g_e + ∫_0^{qx} g_o with g = f(., y(.)), per component.

    Raises:
        TailNotNegligible: propagated from the Jackson sums.
    """
    y0 = _as_complex_vector(y0)
    out = []
    for c, g in enumerate(_rhs_on_lattice(f, y)):
        g_e, g_o = parity_decompose(g)
        values = y0[c] + integral_fn(g_e).values + integral_to_qx(g_o).values
        out.append(y[c].with_values(values, Parity.GENERAL))
    return tuple(out)


def characterization_residual(f: Callable, y: Sequence[LatticeFn], y0: Sequence[complex]) -> float:
    """max |∫_0^x f(t, y(t)) d_qt - (y_o(x) + y_e(x/q) - y0)| over the window.

    For odd y this is ∫_0^x f = y(x) - y0, for even y ∫_0^x f = y(x/q) - y0.
    """
    y0 = _as_complex_vector(y0)
    worst = 0.0
    zero = y[0].lattice.zero_index
    for c, g in enumerate(_rhs_on_lattice(f, y)):
        y_e, y_o = parity_decompose(y[c])
        expected = y_o.values + shift(y_e, "backward").values - y0[c]
        gap = np.abs(integral_fn(g).values - expected)
        gap[zero] = np.nan
        gap = gap[np.isfinite(gap)]
        if gap.size:
            worst = max(worst, float(np.max(gap)))
    return worst


def _residual_band(lat: QLattice, h: float, floor: float) -> np.ndarray:
    r = np.abs(lat.points)
    return (r >= floor * h * (1 - 1e-12)) & (r <= h * (1 + 1e-12))


def _pointwise_residual(f: Callable, y: Sequence[LatticeFn], band: np.ndarray) -> LatticeFn:
    total = np.zeros(len(y[0].lattice), dtype=float)
    for c, g in enumerate(_rhs_on_lattice(f, y)):
        total += np.abs(rubin_derivative(y[c]).values - g.values)
    total[~band] = np.nan
    return y[0].with_values(total, Parity.GENERAL)


def solve_first_order(
    p: FirstOrderProblem,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> Solution:
    """Picard iteration from the constant y0 on the contraction window.

    Raises:
        NotContracting: the window holds no lattice point besides 0, or the
            increments stop decreasing for STALL_LIMIT consecutive steps.
        MaxIterations: max_iter steps without reaching tol.
    """
    settings = settings or load_settings()
    tol = settings.picard_tol if tol is None else tol
    max_iter = settings.max_iter if max_iter is None else max_iter
    lat = p.lattice

    L, M = estimate_lipschitz(p.f, p.region, settings.lipschitz_samples, settings.seed)
    h = contraction_radius(max(L, _TINY_L), M, p.region)
    radii = lat.radii[lat.radii <= h * (1 + 1e-12)]
    if radii.size == 0:
        raise NotContracting(
            f"contraction radius h={h:.3g} lies inside the innermost ring {lat.radii[-1]:.3g}"
        )
    h_used = float(radii[0])
    logger.info(f"Picard window h={h_used:.6g} (L~{L:.3g}, M~{M:.3g})")

    inside = np.abs(lat.points) <= h_used * (1 + 1e-12)
    y = tuple(
        LatticeFn(lattice=lat, values=np.where(inside, y0c, np.nan), parity=Parity.GENERAL)
        for y0c in p.y0
    )

    scale = max(1.0, float(np.max(np.abs(p.y0))))
    noise = NOISE_FACTOR * np.finfo(float).eps * scale
    increments: List[float] = []
    stalled = 0
    for iteration in range(1, max_iter + 1):
        new = tuple(c.restrict(h_used) for c in picard_step(p.f, y, p.y0))
        delta = float(np.nanmax(np.sum(np.abs(_stack(new) - _stack(y)), axis=0), initial=0.0))
        increments.append(delta)
        y = new
        scale = max(scale, max(c.max_abs() for c in y))
        noise = NOISE_FACTOR * np.finfo(float).eps * scale
        logger.debug(f"Picard iteration {iteration}: increment {delta:.3e}")

        if delta <= max(tol * scale, noise):
            break
        if len(increments) > 1 and delta >= increments[-2]:
            stalled += 1
            if stalled >= STALL_LIMIT:
                raise NotContracting(
                    f"Picard increments stopped decreasing after {iteration} iterations "
                    f"(last {delta:.3g})"
                )
        else:
            stalled = 0
    else:
        raise MaxIterations(f"no convergence within {max_iter} iterations (last increment {increments[-1]:.3g})")

    parities = p.parity or (Parity.GENERAL,) * p.dim
    y = tuple(_declare_parity(c, parity) for c, parity in zip(y, parities))
    band = _residual_band(lat, h_used, settings.residual_floor)
    pointwise = _pointwise_residual(p.f, y, band)
    finite = pointwise.values[np.isfinite(pointwise.values)]
    residual = float(np.max(finite.real)) if finite.size else 0.0

    return Solution(
        components=y,
        iterations=len(increments),
        residual=residual,
        characterization=characterization_residual(p.f, y, p.y0),
        h_used=h_used,
        increments=tuple(increments),
        pointwise_residual=pointwise,
        lipschitz=L,
        bound=M,
        noise_floor=noise,
    )


def _declare_parity(f: LatticeFn, parity: Parity) -> LatticeFn:
    """Attach the expected parity when the iterate has it to rounding."""
    if parity == Parity.GENERAL:
        return f
    candidate = f.with_parity(parity)
    if candidate.check_parity() <= 1e-10:
        return candidate
    logger.debug(f"solution component is not {parity.value}; keeping general parity")
    return f


# Second-order linear equations


def eval_coefficient(func: Coefficient, xs: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient on an array, falling back to a pointwise loop."""
    xs = np.asarray(xs, dtype=float)
    try:
        out = np.asarray(func(xs), dtype=complex)
        if out.shape not in ((), xs.shape):
            raise ValueError("shape mismatch")
        return np.array(np.broadcast_to(out, xs.shape))
    except EvaluationError:
        raise
    except Exception:
        pass
    try:
        return np.array([complex(func(float(x))) for x in xs.ravel()]).reshape(xs.shape)
    except Exception as e:
        raise EvaluationError(f"coefficient evaluation failed: {e}") from e


def check_coefficients(s: SecondOrderSpec) -> None:
    """a0 must not vanish and a1/a0, a2/a0 must be finite on the window and
    its outer neighbours.

    Raises:
        DomainError: with "a0 vanishes at x=..." or an unbounded ratio.
    """
    pts = s.lattice.points
    xs = np.concatenate([pts, pts / s.q])
    a0 = eval_coefficient(s.a0, xs)
    vanish = np.abs(a0) == 0
    if np.any(vanish):
        raise DomainError(f"a0 vanishes at x={xs[np.argmax(vanish)]:.17g}")
    for name, func in (("a1", s.a1), ("a2", s.a2), ("b", s.b)):
        ratio = eval_coefficient(func, xs) / a0
        if not np.all(np.isfinite(ratio)):
            raise DomainError(f"{name}/a0 is not bounded on the window")


def _split_forcing(b: Coefficient, branch: Parity) -> Coefficient:
    sign = 1 if branch == Parity.EVEN else -1

    def part(x):
        return (eval_coefficient(b, x) + sign * eval_coefficient(b, -np.asarray(x, dtype=float))) / 2

    return part


def _branch_rhs(s: SecondOrderSpec, branch: Parity) -> Rhs:
    q = s.q
    forcing = _split_forcing(s.b, branch)

    def f(xs: np.ndarray, Y: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        y, z = Y[0], Y[1]
        t = xs / q
        a0 = eval_coefficient(s.a0, t)
        E = (eval_coefficient(s.a1, t) + t * (1 - q) * eval_coefficient(s.a2, t)) / a0
        A2 = -eval_coefficient(s.a2, t) / (q * a0)
        B = forcing(t) / (q * a0)
        if branch == Parity.ODD:
            dz = (-E * z / q + A2 * y + B) / (1 + (1 - q) * t * E)
        else:
            dz = -E * z + A2 * y + B
        return np.vstack([z, dz])

    return f


def reduce_second_order(
    s: SecondOrderSpec,
    branch: Optional[Parity] = None,
    settings: Optional[Settings] = None,
) -> FirstOrderProblem:
    """The system ∂y = z, ∂z = f2(x, y, z) for one parity branch.

    Without an explicit branch, (b1, 0) selects the even branch and (0, b2)
    the odd branch.

    Raises:
        DomainError: a0 vanishes on the window.
        ParityError: both initial values are nonzero and no branch was given.
    """
    settings = settings or load_settings()
    check_coefficients(s)
    if branch is None:
        if s.b2 == 0:
            branch = Parity.EVEN
        elif s.b1 == 0:
            branch = Parity.ODD
        else:
            raise ParityError("initial data (b1, b2) mixes both branches; use solve_second_order_linear")
    branch = Parity(branch)
    if branch == Parity.GENERAL:
        raise ParityError("branch must be even or odd")

    y0 = (s.b1, 0) if branch == Parity.EVEN else (0, s.b2)
    region = RegionSpec(
        alpha=float(s.lattice.radii[0]),
        beta=settings.beta * max(1.0, abs(s.b1), abs(s.b2)),
        rho=settings.rho,
        y0=y0,
    )
    return FirstOrderProblem(
        f=_branch_rhs(s, branch),
        region=region,
        lattice=s.lattice,
        parity=(branch, branch.flipped()),
    )


def _superpose(first: Solution, second: Solution) -> Solution:
    h = min(first.h_used, second.h_used)
    components = tuple(
        (a + b).restrict(h) for a, b in zip(first.components, second.components)
    )
    pointwise = None
    if first.pointwise_residual is not None and second.pointwise_residual is not None:
        pointwise = (first.pointwise_residual + second.pointwise_residual).restrict(h)
    return Solution(
        components=components,
        iterations=first.iterations + second.iterations,
        residual=first.residual + second.residual,
        characterization=first.characterization + second.characterization,
        h_used=h,
        increments=(),
        pointwise_residual=pointwise,
        lipschitz=max(first.lipschitz, second.lipschitz),
        bound=max(first.bound, second.bound),
        noise_floor=max(first.noise_floor, second.noise_floor),
    )


def solve_second_order_linear(
    s: SecondOrderSpec,
    tol: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> Tuple[Solution, Solution, Solution]:
    """(even part, odd part, combined) for the data y(0) = b1, ∂_q y(0) = b2.

    The even part carries (b1, 0) and the even part of b, the odd part
    (0, b2) and the odd part of b; combined is their sum and reports the sum
    of both residuals.
    """
    settings = settings or load_settings()
    even = solve_first_order(reduce_second_order(s, Parity.EVEN, settings), tol, settings=settings)
    odd = solve_first_order(reduce_second_order(s, Parity.ODD, settings), tol, settings=settings)
    combined = _superpose(even, odd)
    logger.info(
        f"second-order solve: h={combined.h_used:.6g}, residual={combined.residual:.3g}, "
        f"iterations={combined.iterations}"
    )
    return even, odd, combined


def solver_lattice(ctx: QContext, alpha: float = 1.0, scale: float = 10.0) -> QLattice:
    """Window from radius alpha down to the depth where Jackson tails of
    integrands of size scale fall below series_tol."""
    if alpha <= 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    k_min = math.ceil(math.log(alpha) / math.log(ctx.q) - 1e-9)
    k_max = max(tail_depth(ctx, scale), k_min + 2)
    return build_lattice(ctx, k_min, k_max)


def solver_window(ctx: QContext, k_min: Optional[int] = None, k_max: Optional[int] = None) -> QLattice:
    """solver_lattice with either end overridden."""
    default = solver_lattice(ctx)
    if k_min is None and k_max is None:
        return default
    return build_lattice(
        ctx,
        default.k_min if k_min is None else k_min,
        default.k_max if k_max is None else k_max,
    )
