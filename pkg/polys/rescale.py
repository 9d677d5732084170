"""
Rescalings between the quartic family and its normal forms.

    P_n(z; t, N) = N^{-n/4} P_n(N^{1/4} z; N^{1/2} t, 1)
    P_n(x; t, N) = c^{-n} S_n(c x; s),   c = 2^{-1/2} N^{1/4},   s = -N^{1/2} t

where S_n are the monic polynomials of the Freud weight e^{-y^4 + s y^2} (lambda = -1/2),
i.e. S_n(y; s) = P_n(y; -s/2, 4).
"""
from enum import Enum
from fractions import Fraction

import mpmath

from core.precision import PrecisionContext
from polys.moments import ModelPoint
from polys.orthopoly import MonicPolynomial, build_pn


class RescaleDirection(str, Enum):
    UNIT_N = "unit_N"
    FREUD = "freud"


def rescale_point(direction: RescaleDirection, point: ModelPoint, ctx: PrecisionContext) -> ModelPoint:
    t = point.t_value(ctx)
    N = point.N_value(ctx)
    if direction == RescaleDirection.UNIT_N:
        return ModelPoint(t=ctx.wrap(ctx.mp.sqrt(N) * t), N=1, n=point.n)
    return ModelPoint(t=ctx.wrap(ctx.mp.sqrt(N) * t / 2), N=4, n=point.n)


def _coordinate_scale(direction: RescaleDirection, N, mp) -> mpmath.mpf:
    """Factor multiplying z under the map: N^{1/4} or 2^{-1/2} N^{1/4}."""
    if direction == RescaleDirection.UNIT_N:
        return mp.root(N, 4)
    return mp.root(N, 4) / mp.sqrt(2)


def rescale_value(direction: RescaleDirection, value, N, weight: int, ctx: PrecisionContext) -> mpmath.mpc:
    """
    Map a coefficient that scales like z^(2*weight): gamma_n^2 and 𝔭_{n,n-2} have
    weight 1, 𝔭_{n,n-4} weight 2.
    """
    mp = ctx.mp
    scale = _coordinate_scale(direction, ctx.real(N), mp)
    return ctx.convert(value) * scale ** (2 * weight)


def rescale_maps(direction: RescaleDirection, poly: MonicPolynomial, ctx: PrecisionContext) -> MonicPolynomial:
    """The polynomial of the same degree in the target normalization."""
    mp = ctx.mp
    N = poly.point.N_value(ctx)
    scale = _coordinate_scale(direction, N, mp)
    coeffs = [c * scale ** (poly.degree - j) for j, c in enumerate(poly.values(ctx))]
    coeffs[-1] = mp.mpc(1)
    for j in range(poly.degree - 1, -1, -2):
        coeffs[j] = mp.mpc(0)
    return MonicPolynomial(
        degree=poly.degree,
        coeffs=tuple(ctx.wrap(c) for c in coeffs),
        point=rescale_point(direction, poly.point, ctx),
    )


def freud_polynomial(n: int, s, ctx: PrecisionContext, lam=Fraction(-1, 2)) -> MonicPolynomial:
    """Monic S_n for the weight |y|^(2 lam + 1) e^{-y^4 + s y^2}; only lam = -1/2 is supported."""
    if Fraction(lam) != Fraction(-1, 2):
        raise ValueError(f"only the lambda = -1/2 Freud family is available, got {lam}")
    s = ctx.convert(s)
    return build_pn(ModelPoint(t=ctx.wrap(-s / 2), N=4), n, ctx)
