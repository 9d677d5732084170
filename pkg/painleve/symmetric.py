"""
The symmetric form of Painlevé-IV

    f_j' = f_j (f_{j+1} - f_{j+2}) + 2 alpha_j,    f_0 + f_1 + f_2 = 2x,    alpha_0 + alpha_1 + alpha_2 = 1,

its Bäcklund transformations s_0, s_1, s_2, pi and the translations T_1, T_2, T_3 built
from them, the parabolic cylinder seeds and the tower T_1^n applied to them.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath

from core.errors import DivisionByZeroComponent, IndeterminateTransformation, SeedZero
from core.precision import PrecisionComplex, PrecisionContext, scaled_pcf

CARTAN = ((2, -1, -1), (-1, 2, -1), (-1, -1, 2))
ORIENTATION = ((0, 1, -1), (-1, 0, 1), (1, -1, 0))


@dataclass(frozen=True)
class P4Triple:
    """Values (f_0, f_1, f_2) at x with exact rational parameters alpha and the applied steps."""
    x: PrecisionComplex
    f: tuple[PrecisionComplex, PrecisionComplex, PrecisionComplex]
    alpha: tuple[Fraction, Fraction, Fraction]
    lineage: tuple[str, ...]
    context: PrecisionContext = field(compare=False, repr=False)

    def values(self) -> list[mpmath.mpc]:
        return [self.context.convert(v) for v in self.f]

    def x_value(self) -> mpmath.mpc:
        return self.context.convert(self.x)

    def constraint_residual(self) -> mpmath.mpc:
        return sum(self.values()) - 2 * self.x_value()

    def plane_residual(self) -> Fraction:
        return sum(self.alpha) - 1


def _rational(mp, value: Fraction):
    return mp.mpf(value.numerator) / value.denominator


def _rebuild(triple: P4Triple, f, alpha, step: str) -> P4Triple:
    ctx = triple.context
    return P4Triple(
        x=triple.x,
        f=tuple(ctx.wrap(v) for v in f),
        alpha=tuple(alpha),
        lineage=triple.lineage + (step,),
        context=ctx,
    )


def s_transform(i: int, triple: P4Triple) -> P4Triple:
    """s_i: f_j += u_ij 2 alpha_i / f_i and alpha_j -= a_ij alpha_i."""
    ctx = triple.context
    mp = ctx.mp
    f = triple.values()
    alpha = triple.alpha
    if alpha[i] != 0:
        scale = max([mp.mpf(1), abs(triple.x_value())] + [abs(v) for v in f])
        if abs(f[i]) <= ctx.zero_tol * scale:
            raise DivisionByZeroComponent(f"f_{i} vanishes at x={triple.x} while alpha_{i}={alpha[i]}")
        shift = 2 * _rational(mp, alpha[i]) / f[i]
        f = [f[j] + ORIENTATION[i][j] * shift for j in range(3)]
    new_alpha = [alpha[j] - CARTAN[i][j] * alpha[i] for j in range(3)]
    return _rebuild(triple, f, new_alpha, f"s{i}")


def pi_transform(triple: P4Triple, inverse: bool = False) -> P4Triple:
    """pi: f_j -> f_{j-1}, alpha_j -> alpha_{j-1}; the inverse shifts the other way."""
    offset = 1 if inverse else -1
    f = triple.values()
    alpha = triple.alpha
    return _rebuild(
        triple,
        [f[(j + offset) % 3] for j in range(3)],
        [alpha[(j + offset) % 3] for j in range(3)],
        "pi_inv" if inverse else "pi",
    )


class Direction(str, Enum):
    FWD = "fwd"
    INV = "inv"


# Steps in the order they are applied: T_1 = pi s_2 s_1, T_2 = s_1 pi s_2, T_3 = s_2 s_1 pi.
WORDS = {
    (1, Direction.FWD): ("s1", "s2", "pi"),
    (2, Direction.FWD): ("s2", "pi", "s1"),
    (3, Direction.FWD): ("pi", "s1", "s2"),
    (1, Direction.INV): ("pi_inv", "s2", "s1"),
    (2, Direction.INV): ("s1", "pi_inv", "s2"),
    (3, Direction.INV): ("s2", "s1", "pi_inv"),
}


def _apply_step(step: str, triple: P4Triple) -> P4Triple:
    if step == "pi":
        return pi_transform(triple)
    if step == "pi_inv":
        return pi_transform(triple, inverse=True)
    return s_transform(int(step[1]), triple)


def T_apply(j: int, triple: P4Triple, direction: Direction = Direction.FWD) -> P4Triple:
    """
    Translation T_j or its inverse. For T_1 the two divisions are by f_1 and by
    (f_1 f_2 + 2 alpha_1)/f_1; either vanishing makes the step indeterminate.
    """
    direction = Direction(direction)
    result = triple
    lineage = triple.lineage
    try:
        for step in WORDS[(j, direction)]:
            result = _apply_step(step, result)
    except DivisionByZeroComponent as e:
        raise IndeterminateTransformation(f"T_{j} {direction.value} is indeterminate at x={triple.x}: {e}") from e
    label = f"T{j}" if direction == Direction.FWD else f"T{j}_inv"
    return P4Triple(x=result.x, f=result.f, alpha=result.alpha, lineage=lineage + (label,), context=result.context)


def t1_explicit(triple: P4Triple) -> tuple[mpmath.mpc, mpmath.mpc, mpmath.mpc]:
    """The closed form of T_1 written out in f_0, f_1, f_2."""
    mp = triple.context.mp
    f0, f1, f2 = triple.values()
    a1 = _rational(mp, triple.alpha[1])
    a2 = _rational(mp, triple.alpha[2])
    correction = 2 * (a1 + a2) * f1 / (f1 * f2 + 2 * a1)
    return f2 + 2 * a1 / f1, f0 - 2 * a1 / f1 + correction, f1 - correction


def system_derivatives(triple: P4Triple) -> list[mpmath.mpc]:
    """f_j' read off from the symmetric system."""
    mp = triple.context.mp
    f = triple.values()
    return [f[j] * (f[(j + 1) % 3] - f[(j + 2) % 3]) + 2 * _rational(mp, triple.alpha[j]) for j in range(3)]


def reconstruct_f2(f1, df1, alpha1, x):
    """f_2 = (-2 alpha_1 + 2 x f_1 - f_1^2 + f_1') / (2 f_1)."""
    return (-2 * alpha1 + 2 * x * f1 - f1 * f1 + df1) / (2 * f1)


def u_searrow(u, du, alpha1, alpha2, x):
    """-(T_1 f)_1 expressed through u = -f_1 and u' only."""
    numerator = ((2 * alpha1) ** 2 - 8 * (alpha1 + alpha2) * u**2 - 4 * x**2 * u**2 - 4 * x * u**3 - u**4
                 - 4 * alpha1 * du + du**2)
    return numerator / (2 * u * (-2 * alpha1 + 2 * x * u + u**2 + du))


class Seed(str, Enum):
    M0 = "m0"
    M1 = "m1"


SEED_ORDERS = {Seed.M0: Fraction(-1, 2), Seed.M1: Fraction(-3, 2)}
SEED_PARAMETERS = {
    Seed.M0: (Fraction(0), Fraction(1, 2), Fraction(1, 2)),
    Seed.M1: (Fraction(0), Fraction(3, 2), Fraction(-1, 2)),
}


def seed_log_derivative(x, which: Seed, ctx: PrecisionContext) -> mpmath.mpc:
    """phi'/phi for phi(x) = e^{x^2/2} D_nu(sqrt(2) x), nu = -1/2 (m0) or -3/2 (m1)."""
    mp = ctx.mp
    nu = _rational(mp, SEED_ORDERS[Seed(which)])
    s = mp.sqrt(2) * ctx.convert(x)
    value = scaled_pcf(ctx, nu, s)
    lower = scaled_pcf(ctx, nu - 1, s)
    if abs(value) <= ctx.zero_tol * abs(lower):
        raise SeedZero(f"the {Seed(which).value} seed vanishes at x={mp.nstr(ctx.convert(x), 15)}")
    return mp.sqrt(2) * nu * lower / value


def seed_triple(x, which: Seed, ctx: PrecisionContext) -> P4Triple:
    """(0, phi'/phi, 2x - phi'/phi) with parameters (0, 1/2, 1/2) for m0 and (0, 3/2, -1/2) for m1."""
    which = Seed(which)
    x = ctx.convert(x)
    r = seed_log_derivative(x, which, ctx)
    return P4Triple(
        x=ctx.wrap(x),
        f=(ctx.wrap(0), ctx.wrap(r), ctx.wrap(2 * x - r)),
        alpha=SEED_PARAMETERS[which],
        lineage=(f"seed_{which.value}",),
        context=ctx,
    )


def tower(n: int, m: int, x, ctx: PrecisionContext) -> P4Triple:
    """T_1^n applied to the m0 seed (m = 0) or the m1 seed (m = -1)."""
    if n < 0:
        raise ValueError(f"tower index must be nonnegative, got {n}")
    if m not in (0, -1):
        raise ValueError(f"only the m = 0 and m = -1 families are available, got {m}")
    triple = seed_triple(x, Seed.M0 if m == 0 else Seed.M1, ctx)
    for _ in range(n):
        triple = T_apply(1, triple)
    return triple


def sigma_from_triple(triple: P4Triple) -> PrecisionComplex:
    mp = triple.context.mp
    f0, f1, f2 = triple.values()
    a1 = _rational(mp, triple.alpha[1])
    a2 = _rational(mp, triple.alpha[2])
    return triple.context.wrap(f0 * f1 * f2 / 2 + a2 * f1 - a1 * f2)


def triple_to_qp(triple: P4Triple) -> tuple[mpmath.mpc, mpmath.mpc]:
    """(q, p) with f_1 = -q, f_2 = 2p."""
    f = triple.values()
    return -f[1], f[2] / 2


def hamiltonian(x, p, q, alpha1, alpha2):
    return (2 * p - q - 2 * x) * p * q - 2 * alpha1 * p - alpha2 * q


@dataclass(frozen=True)
class SigmaFormResidual:
    """Residuals of the sigma form with (x sigma' - sigma) unsquared (printed) and squared."""
    printed: mpmath.mpc
    squared: mpmath.mpc


def sigma_form_residual(derivatives, x, alpha, ctx: PrecisionContext) -> SigmaFormResidual:
    mp = ctx.mp
    sigma, d1, d2 = (ctx.convert(v) for v in derivatives)
    x = ctx.convert(x)
    a1 = _rational(mp, Fraction(alpha[1]))
    a2 = _rational(mp, Fraction(alpha[2]))
    tail = 4 * d1 * (d1 + 2 * a1) * (d1 - 2 * a2)
    return SigmaFormResidual(
        printed=d2**2 - 4 * (x * d1 - sigma) + tail,
        squared=d2**2 - 4 * (x * d1 - sigma) ** 2 + tail,
    )


def derivatives_at(fun, x, order: int, ctx: PrecisionContext) -> list[mpmath.mpc]:
    """fun and its derivatives up to `order` at x by mpmath's adaptive-precision differences."""
    return list(ctx.mp.diffs(fun, ctx.convert(x), order))


def tower_sigma_derivatives(n: int, m: int, x, ctx: PrecisionContext) -> list[mpmath.mpc]:
    return derivatives_at(lambda y: ctx.convert(sigma_from_triple(tower(n, m, y, ctx))), x, 2, ctx)


def p4_ode_residual(n: int, m: int, j: int, x, ctx: PrecisionContext) -> mpmath.mpf:
    """
    Relative residual of the scalar equation solved by u = -f_j, with
    Theta_inf = (alpha_{j-1} - alpha_{j+1} + 1)/2 and Theta_0^2 = alpha_j^2/4.
    """
    mp = ctx.mp
    triple = tower(n, m, x, ctx)
    alpha = triple.alpha
    theta_inf = _rational(mp, (alpha[(j - 1) % 3] - alpha[(j + 1) % 3] + 1) / 2)
    theta0_sq = _rational(mp, alpha[j] ** 2 / 4)
    x = ctx.convert(x)
    u, du, d2u = derivatives_at(lambda y: -tower(n, m, y, ctx).values()[j], x, 2, ctx)
    terms = [du**2 / (2 * u), mp.mpf(1.5) * u**3, 4 * x * u**2, 2 * (x**2 + 1 - 2 * theta_inf) * u,
             -8 * theta0_sq / u]
    residual = d2u - mp.fsum(terms)
    scale = max([abs(d2u)] + [abs(term) for term in terms])
    return abs(residual) / scale


def toda_m_direction_residual(n: int, x, ctx: PrecisionContext) -> mpmath.mpc:
    """
    The Toda relation along T_2 with its constant removed by a logarithmic derivative:
    sigma_0''/sigma_0' - (sigma_+ + sigma_- - 2 sigma_0), where sigma_± belong to
    T_2^{±1} of the m = 0 tower triple.
    """
    sigma, d1, d2 = tower_sigma_derivatives(n, 0, x, ctx)
    base = tower(n, 0, x, ctx)
    forward = ctx.convert(sigma_from_triple(T_apply(2, base, Direction.FWD)))
    backward = ctx.convert(sigma_from_triple(T_apply(2, base, Direction.INV)))
    logging.info(f"m-direction Toda check at n={n}, x={base.x}")
    return d2 / d1 - (forward + backward - 2 * sigma)
