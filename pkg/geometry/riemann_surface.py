"""
The genus-one surface w^2 = R(z) glued from two copies of the plane along J_1 and J_2.

The holomorphic differential is c dz/w with c = (4 int_{a_2}^0 dx/R^(1/2))^(-1), so the
alpha-period through the gap is 1 and B = 2c int_{-b_2}^{-a_2} dx/R_+^(1/2) is the beta-period.
The Abel map is based at b_2 and 𝒜^(1) = -𝒜^(0).
"""
import logging
import math
from dataclasses import dataclass

import mpmath

from core.errors import Inconclusive, NearPole, OnCutError
from core.precision import PrecisionComplex, PrecisionContext
from geometry.spectral_curve import (
    TwoCutGeometry,
    check_off_cuts,
    chord_segments,
    escape_direction,
    locate_on_cut,
    r_sqrt,
    r_sqrt_boundary,
    segment_distance,
    segments_cross,
)


@dataclass(frozen=True)
class SurfaceData:
    geometry: TwoCutGeometry
    alpha_norm: PrecisionComplex
    B: PrecisionComplex
    abel_zero0: PrecisionComplex
    abel_zero1: PrecisionComplex
    abel_inf0: PrecisionComplex
    abel_inf1: PrecisionComplex

    def abel_zero(self, sheet: int, ctx: PrecisionContext) -> mpmath.mpc:
        return ctx.convert(self.abel_zero0 if sheet == 0 else self.abel_zero1)

    def abel_infinity(self, sheet: int, ctx: PrecisionContext) -> mpmath.mpc:
        return ctx.convert(self.abel_inf0 if sheet == 0 else self.abel_inf1)


def _check_sheet(sheet: int):
    if sheet not in (0, 1):
        raise ValueError(f"sheet must be 0 or 1, got {sheet}")


def _segment_integral(fun, p, q, ctx: PrecisionContext):
    """int_p^q fun(x) dx along the straight segment."""
    return ctx.mp.quad(lambda s: fun(p + s * (q - p)), [0, 1]) * (q - p)


def _ray_integral(z, direction, geometry: TwoCutGeometry, ctx: PrecisionContext):
    """int_z^infinity dzeta/R^(1/2) along z + direction * s."""
    mp = ctx.mp
    direction = mp.mpc(direction)
    return mp.quad(lambda s: 1 / r_sqrt(z + direction * s, geometry, ctx), [0, 1, mp.inf]) * direction


def surface_data(geometry: TwoCutGeometry, ctx: PrecisionContext) -> SurfaceData:
    mp = ctx.mp
    a2, b2 = geometry.endpoints(ctx)
    gap_half = _segment_integral(lambda x: 1 / r_sqrt(x, geometry, ctx), a2, mp.mpc(0), ctx)
    c = 1 / (4 * gap_half)

    def plus_reciprocal(x):
        return 1 / r_sqrt_boundary(x, geometry, ctx)[0]

    B = 2 * c * _segment_integral(plus_reciprocal, -b2, -a2, ctx)
    if not mp.im(B) > 0:
        raise Inconclusive(f"beta-period B={mp.nstr(B, 10)} has no positive imaginary part; t is not in O2")

    # b_2 -> a_2 along the left side of J_2, where 1/R^(1/2) takes the values 1/R_+
    along_cut = _segment_integral(plus_reciprocal, b2, a2, ctx)
    zero0 = c * (along_cut + gap_half)
    zero1 = c * (along_cut - gap_half)

    # continue J_2 straight out of b_2 unless that runs into J_1 or the gap
    outward = complex((b2 - a2) / abs(b2 - a2))
    length = 4 * geometry.scale() + 4
    obstacles = chord_segments(geometry, ctx)[:2]
    start = complex(b2) + 1e-9 * outward
    direction = outward
    if any(segments_cross(start, start + length * outward, p, q) for p, q in obstacles):
        try:
            direction = escape_direction(start, obstacles, length)
        except OnCutError as e:
            raise Inconclusive(f"no straight path from b_2 to infinity: {e}") from e
        logging.warning(f"Ray from b_2 along J_2 meets another cut; integrating along {direction} instead")
    u_inf = c * _ray_integral(b2, direction, geometry, ctx)
    logging.info(f"Surface data at t={mp.nstr(geometry.t_value(ctx), 10)}: B={mp.nstr(B, 12)}")
    return SurfaceData(
        geometry=geometry,
        alpha_norm=ctx.wrap(c),
        B=ctx.wrap(B),
        abel_zero0=ctx.wrap(zero0),
        abel_zero1=ctx.wrap(zero1),
        abel_inf0=ctx.wrap(u_inf),
        abel_inf1=ctx.wrap(-u_inf),
    )


def abel_map(z, sheet: int, surface: SurfaceData, ctx: PrecisionContext) -> mpmath.mpc:
    """𝒜^(sheet)(z) = ±(𝒜(infinity^(0)) - c int_z^infinity dzeta/R^(1/2)), off J_1, J_2 and the gap."""
    _check_sheet(sheet)
    mp = ctx.mp
    geometry = surface.geometry
    z = ctx.convert(z)
    check_off_cuts(z, geometry, ctx, include_gap=False)
    gap = geometry.chords(ctx)["I"]
    if segment_distance(mp, z, *gap) <= ctx.cut_tol * geometry.scale():
        raise OnCutError(f"z={mp.nstr(z, 12)} lies on the gap, where the Abel map jumps by B")
    length = abs(complex(z)) + 4 * geometry.scale() + 4
    try:
        direction = escape_direction(complex(z), chord_segments(geometry, ctx), length)
    except OnCutError as e:
        raise Inconclusive(f"no straight path from {mp.nstr(z, 10)} to infinity avoids the cuts") from e
    value = surface.abel_infinity(0, ctx) - ctx.convert(surface.alpha_norm) * _ray_integral(z, direction, geometry, ctx)
    return value if sheet == 0 else -value


def reduce_lattice(x, B, ctx: PrecisionContext) -> tuple[mpmath.mpc, int, int]:
    """x = reduced + m + n B with the reduced point in the fundamental parallelogram; returns (reduced, m, n)."""
    mp = ctx.mp
    x = ctx.convert(x)
    B = ctx.convert(B)
    n = int(mp.floor(mp.im(x) / mp.im(B)))
    shifted = x - n * B
    m = int(mp.floor(mp.re(shifted)))
    return shifted - m, m, n


@dataclass(frozen=True)
class ThetaEvaluator:
    B: PrecisionComplex
    trunc_K: int

    def terms(self, x, ctx: PrecisionContext):
        mp = ctx.mp
        B = ctx.convert(self.B)
        x = ctx.convert(x)
        center = int(mp.nint(-mp.im(x) / mp.im(B)))
        for k in range(center - self.trunc_K, center + self.trunc_K + 1):
            yield mp.exp(mp.pi * mp.j * (B * k * k + 2 * k * x))

    def value_and_size(self, x, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpf]:
        mp = ctx.mp
        total = mp.mpc(0)
        size = mp.mpf(0)
        for term in self.terms(x, ctx):
            total += term
            size += abs(term)
        return total, size


def build_theta_evaluator(B, ctx: PrecisionContext) -> ThetaEvaluator:
    """Cutoff K with e^(-pi Im B K^2) below series_tol around the dominant term."""
    mp = ctx.mp
    B = ctx.convert(B)
    if not mp.im(B) > 0:
        raise ValueError(f"theta needs Im B > 0, got B={mp.nstr(B, 10)}")
    K = int(math.ceil(math.sqrt(float(-mp.log(ctx.series_tol)) / (math.pi * float(mp.im(B)))))) + 1
    return ThetaEvaluator(B=ctx.wrap(B), trunc_K=K)


def riemann_theta(x, evaluator: ThetaEvaluator, ctx: PrecisionContext) -> mpmath.mpc:
    """theta(x; B) = sum_k exp(pi i B k^2 + 2 pi i k x)."""
    return evaluator.value_and_size(x, ctx)[0]


def _theta_quotient(a, surface: SurfaceData, evaluator: ThetaEvaluator, ctx: PrecisionContext) -> mpmath.mpc:
    mp = ctx.mp
    shift = (ctx.convert(surface.B) + 1) / 2
    numerator = riemann_theta(a - surface.abel_zero(1, ctx) - shift, evaluator, ctx)
    denominator, size = evaluator.value_and_size(a - surface.abel_zero(0, ctx) - shift, ctx)
    if abs(denominator) <= ctx.check_tol * size:
        raise NearPole(f"theta quotient is at its pole 0^(0) (|denominator|={mp.nstr(abs(denominator), 5)})")
    return numerator / denominator


def theta_ratio(z, sheet: int, surface: SurfaceData, ctx: PrecisionContext,
                evaluator: ThetaEvaluator | None = None) -> mpmath.mpc:
    """
    Theta^(k)(z) = theta(𝒜^(k)(z) - 𝒜(0^(1)) - (B+1)/2) / theta(𝒜^(k)(z) - 𝒜(0^(0)) - (B+1)/2),
    with its only pole at 0^(0) and its only zero at 0^(1).
    """
    evaluator = evaluator or build_theta_evaluator(surface.B, ctx)
    return _theta_quotient(abel_map(z, sheet, surface, ctx), surface, evaluator, ctx)


def theta_ratio_at_infinity(sheet: int, surface: SurfaceData, ctx: PrecisionContext,
                            evaluator: ThetaEvaluator | None = None) -> mpmath.mpc:
    _check_sheet(sheet)
    evaluator = evaluator or build_theta_evaluator(surface.B, ctx)
    return _theta_quotient(surface.abel_infinity(sheet, ctx), surface, evaluator, ctx)


def theta_ratio_at_zero(sheet: int, surface: SurfaceData, ctx: PrecisionContext,
                        evaluator: ThetaEvaluator | None = None) -> mpmath.mpc:
    _check_sheet(sheet)
    evaluator = evaluator or build_theta_evaluator(surface.B, ctx)
    return _theta_quotient(surface.abel_zero(sheet, ctx), surface, evaluator, ctx)


def theta_identity_residual(surface: SurfaceData, ctx: PrecisionContext) -> mpmath.mpf:
    """|Theta^(0)(infinity)/Theta^(1)(infinity) - 4/(a_2 - b_2)^2|."""
    evaluator = build_theta_evaluator(surface.B, ctx)
    a2, b2 = surface.geometry.endpoints(ctx)
    ratio = (theta_ratio_at_infinity(0, surface, ctx, evaluator)
             / theta_ratio_at_infinity(1, surface, ctx, evaluator))
    return abs(ratio - 4 / (a2 - b2) ** 2)


def abel_zero_defect(surface: SurfaceData, ctx: PrecisionContext) -> mpmath.mpf:
    """Distance of 𝒜(0^(0)) - 𝒜(0^(1)) - 1/2 from the lattice Z + B Z."""
    mp = ctx.mp
    reduced, _, _ = reduce_lattice(surface.abel_zero(0, ctx) - surface.abel_zero(1, ctx) - mp.mpf(0.5), surface.B, ctx)
    B = ctx.convert(surface.B)
    return min(abs(reduced - corner) for corner in (0, 1, B, 1 + B))


# gamma(z) = ((z - b_2)(z + a_2) / ((z + b_2)(z - a_2)))^(1/4)

def quartic_root_gamma(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """Product of two principal quarter roots, cut along J_2 and J_1 respectively; gamma(infinity) = 1."""
    mp = ctx.mp
    z = ctx.convert(z)
    check_off_cuts(z, geometry, ctx)
    a2, b2 = geometry.endpoints(ctx)
    return mp.root((z - b2) / (z - a2), 4) * mp.root((z + a2) / (z + b2), 4)


@dataclass(frozen=True)
class GammaAB:
    gamma: PrecisionComplex
    A: PrecisionComplex
    B: PrecisionComplex


def _ab_of(gamma, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpc]:
    mp = ctx.mp
    return (gamma + 1 / gamma) / 2, (gamma - 1 / gamma) / (2 * mp.j)


def gamma_ab(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> GammaAB:
    gamma = quartic_root_gamma(z, geometry, ctx)
    A, B = _ab_of(gamma, ctx)
    return GammaAB(gamma=ctx.wrap(gamma), A=ctx.wrap(A), B=ctx.wrap(B))


def _quarter_root_boundary(mp, x, p, q, left: bool):
    """Boundary value of the principal ((z - q)/(z - p))^(1/4) on the open segment p -> q."""
    ratio = (x - q) / (x - p)
    return mp.root(-ratio, 4) * mp.expjpi(mp.mpf(0.25) if left else -mp.mpf(0.25))


def ab_boundary_values(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> dict[str, mpmath.mpc]:
    """A_±, B_± at an interior point of J_1 or J_2, + being the left side of the cut orientation."""
    mp = ctx.mp
    x = ctx.convert(x)
    a2, b2 = geometry.endpoints(ctx)
    name = locate_on_cut(x, geometry, ctx)
    values = {}
    for side, left in (("+", True), ("-", False)):
        if name == "J2":
            gamma = _quarter_root_boundary(mp, x, a2, b2, left) * mp.root((x + a2) / (x + b2), 4)
        else:
            gamma = mp.root((x - b2) / (x - a2), 4) * _quarter_root_boundary(mp, x, -b2, -a2, left)
        A, B = _ab_of(gamma, ctx)
        values[f"A{side}"] = A
        values[f"B{side}"] = B
    return values


def ab_jump_residual(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpf:
    """
    max(|A_+ + B_-|, |A_- - B_+|), which vanishes on the cuts.

    "+" is the left side of J_2 oriented a_2 -> b_2 and of J_1 oriented -b_2 -> -a_2. With
    that choice gamma_- = -i gamma_+, which gives A_+ = -B_- and A_- = B_+; the pair
    A_+ = B_-, A_- = -B_+ belongs to the opposite labelling of the sides.
    """
    values = ab_boundary_values(x, geometry, ctx)
    return max(abs(values["A+"] + values["B-"]), abs(values["A-"] - values["B+"]))

