"""
Leading-order predictions in the two-cut region for the recurrence data, the norming
constants, the sub-leading coefficients, P_n(z) away from the cuts and the scaled
parabolic cylinder solutions of Painlevé-IV.
"""
from enum import Enum

import mpmath

from core.precision import PrecisionContext
from geometry.riemann_surface import (
    SurfaceData,
    build_theta_evaluator,
    quartic_root_gamma,
    theta_ratio,
    theta_ratio_at_infinity,
)
from geometry.spectral_curve import SzegoKind, TwoCutGeometry, g_fun, szego_exponent


class Quantity(str, Enum):
    GAMMA_SQ = "gamma_sq"
    H_N = "h_n"
    P_SUB_EVEN = "p_sub_even"
    P_SUB_ODD = "p_sub_odd"
    P_OUTER = "P_outer"
    P4_F0 = "p4_f0"
    P4_F1 = "p4_f1"
    P4_F2 = "p4_f2"
    P4_SIGMA_EVEN = "p4_sigma_even"
    P4_SIGMA_ODD = "p4_sigma_odd"


P4_QUANTITIES = (
    Quantity.P4_F0, Quantity.P4_F1, Quantity.P4_F2, Quantity.P4_SIGMA_EVEN, Quantity.P4_SIGMA_ODD,
)


def _gap(geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    a2, b2 = geometry.endpoints(ctx)
    return a2 - b2


def predict_gamma_sq(n: int, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """(a_2 - b_2)^2/4 for even n and its reciprocal 4/(a_2 - b_2)^2 for odd n."""
    square = _gap(geometry, ctx) ** 2
    return square / 4 if n % 2 == 0 else 4 / square


def predict_h(n: int, N, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """2 pi e^(N ell_*) times (a_2 - b_2)/2 for even n, 2/(a_2 - b_2) for odd n."""
    mp = ctx.mp
    gap = _gap(geometry, ctx)
    factor = gap / 2 if n % 2 == 0 else 2 / gap
    return 2 * mp.pi * mp.exp(mp.mpf(N) * ctx.convert(geometry.ell_star)) * factor


def predict_subleading(n: int, geometry: TwoCutGeometry, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpc]:
    """
    (𝔭_{2n,2n-2}, 𝔭_{2n-1,2n-3}) at N = N_{2n}:
    n t + (a_2 - b_2)^2/8 and n t + (3 a_2^2 + 2 a_2 b_2 + 3 b_2^2)/8.
    """
    a2, b2 = geometry.endpoints(ctx)
    linear = n * geometry.t_value(ctx)
    return linear + (a2 - b2) ** 2 / 8, linear + (3 * a2 * a2 + 2 * a2 * b2 + 3 * b2 * b2) / 8


def outer_amplitude(z, n: int, N, surface: SurfaceData, ctx: PrecisionContext) -> mpmath.mpc:
    """
    D^(N - n)(z) A(z), times Theta^(0)(infinity)/Theta^(0)(z) for odd n.
    N may be any positive real; D^(N - n) is exp((N - n) log D) with log D from szego_exponent.
    """
    mp = ctx.mp
    geometry = surface.geometry
    gamma = quartic_root_gamma(z, geometry, ctx)
    amplitude = (gamma + 1 / gamma) / 2
    power = ctx.real(N) - n
    if power:
        amplitude *= mp.exp(power * szego_exponent(z, geometry, SzegoKind.D_NORM, ctx))
    if n % 2:
        evaluator = build_theta_evaluator(surface.B, ctx)
        amplitude *= (theta_ratio_at_infinity(0, surface, ctx, evaluator)
                      / theta_ratio(z, 0, surface, ctx, evaluator))
    return amplitude


def predict_pn_outer(z, n: int, N, surface: SurfaceData, ctx: PrecisionContext) -> mpmath.mpc:
    """
    e^(n g(z)) D^(N - n)(z) A(z) {1, Theta^(0)(infinity)/Theta^(0)(z)} for z off the cuts.
    For odd n the pole of Theta^(0) at 0^(0) makes the prediction vanish at z = 0.
    """
    mp = ctx.mp
    z = ctx.convert(z)
    if n % 2 and abs(z) <= ctx.cut_tol:
        return mp.mpc(0)
    return mp.exp(n * g_fun(z, surface.geometry, ctx)) * outer_amplitude(z, n, N, surface, ctx)


def sqrt_x2_minus_4(x, ctx: PrecisionContext) -> mpmath.mpc:
    """The branch of (x^2 - 4)^(1/2) analytic off [-2, 2] with (x^2 - 4)^(1/2) ~ -x at infinity."""
    mp = ctx.mp
    x = ctx.convert(x)
    return -mp.sqrt(x - 2) * mp.sqrt(x + 2)


def predict_p4(x, kind: Quantity, ctx: PrecisionContext) -> mpmath.mpc:
    """Limits of 2^(1/2) n^(-1/2) F(2^(-1/2) n^(1/2) x) for the tower components F."""
    x = ctx.convert(x)
    root = sqrt_x2_minus_4(x, ctx)
    kind = Quantity(kind)
    if kind == Quantity.P4_F0:
        return x + root
    if kind == Quantity.P4_F1:
        return 4 / (x + root)
    if kind == Quantity.P4_F2:
        return ctx.mp.mpc(0)
    if kind == Quantity.P4_SIGMA_EVEN:
        return (x - root) / 2
    if kind == Quantity.P4_SIGMA_ODD:
        return (-x + root) / 2
    raise ValueError(f"{kind.value} is not a Painlevé-IV quantity")
