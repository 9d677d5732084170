"""
Exact-versus-predicted comparison over a range of degrees, with a least-squares fit of
the decay exponent p in |error| ~ C n^(-p).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import mpmath
import numpy as np

from asymptotics.predictors import (
    P4_QUANTITIES,
    Quantity,
    predict_gamma_sq,
    predict_h,
    predict_p4,
    predict_pn_outer,
    predict_subleading,
)
from core.precision import PrecisionContext
from geometry.riemann_surface import SurfaceData, surface_data
from geometry.spectral_curve import TwoCutGeometry, two_cut_geometry
from painleve.symmetric import sigma_from_triple, tower
from polys.hankel import op_sequence
from polys.moments import ModelPoint
from polys.orthopoly import build_pn


class ScalingSequence(str, Enum):
    DIAGONAL = "n"
    ALTERNATING = "alternating"


def sequence_N(n: int, sequence: ScalingSequence) -> int:
    """N_n = n, or N_n = n + (-1)^n."""
    if ScalingSequence(sequence) == ScalingSequence.DIAGONAL:
        return n
    return n + (1 if n % 2 == 0 else -1)


@dataclass
class AsymptoticReport:
    quantity: Quantity
    t: complex
    n_range: tuple[int, int]
    errors: list[tuple[int, float]] = field(default_factory=list)
    # fitted separately on even and odd n
    decay_fit: float | None = None
    decay_fit_odd: float | None = None
    sequence: ScalingSequence = ScalingSequence.DIAGONAL

    def max_scaled_error(self) -> float:
        """max_n n |error|, bounded when the error is O(1/n)."""
        return max(n * err for n, err in self.errors)


def decay_exponent(errors: list[tuple[int, float]], parity: int | None = None) -> float | None:
    """Minus the slope of log|error| against log n; restricted to one parity when given."""
    points = [(n, err) for n, err in errors if err > 0 and (parity is None or n % 2 == parity)]
    if len(points) < 2:
        return None
    ns = np.array([n for n, _ in points], dtype=float)
    errs = np.array([err for _, err in points], dtype=float)
    slope, _ = np.polyfit(np.log(ns), np.log(errs), 1)
    return float(-slope)


def scaled_tower_value(n: int, x, kind: Quantity, ctx: PrecisionContext) -> mpmath.mpc:
    """2^(1/2) n^(-1/2) F(2^(-1/2) n^(1/2) x) for F a component of the (n,0,0) triple or sigma_{n-1,m,0}."""
    mp = ctx.mp
    x = ctx.convert(x)
    kind = Quantity(kind)
    point = mp.sqrt(mp.mpf(n) / 2) * x
    scale = mp.sqrt(2) / mp.sqrt(n)
    if kind in (Quantity.P4_F0, Quantity.P4_F1, Quantity.P4_F2):
        j = {Quantity.P4_F0: 0, Quantity.P4_F1: 1, Quantity.P4_F2: 2}[kind]
        return scale * tower(n, 0, point, ctx).values()[j]
    m = 0 if kind == Quantity.P4_SIGMA_EVEN else -1
    return scale * ctx.convert(sigma_from_triple(tower(n - 1, m, point, ctx)))


def _exact_error(quantity: Quantity, n: int, t, geometry: TwoCutGeometry, sequence: ScalingSequence,
                 ctx: PrecisionContext, z, x, surface: SurfaceData | None) -> float:
    mp = ctx.mp
    if quantity in P4_QUANTITIES:
        return float(abs(scaled_tower_value(n, x, quantity, ctx) - predict_p4(x, quantity, ctx)))
    if quantity in (Quantity.P_SUB_EVEN, Quantity.P_SUB_ODD):
        data = op_sequence(ModelPoint(t=ctx.wrap(t), N=sequence_N(2 * n, sequence)), 2 * n - 1, ctx)
        even, odd = predict_subleading(n, geometry, ctx)
        if quantity == Quantity.P_SUB_EVEN:
            return float(abs(ctx.convert(data.p2(2 * n)) - even))
        return float(abs(ctx.convert(data.p2(2 * n - 1)) - odd))

    N = sequence_N(n, sequence)
    point = ModelPoint(t=ctx.wrap(t), N=N)
    if quantity == Quantity.P_OUTER:
        poly = build_pn(point, n, ctx)
        predicted = predict_pn_outer(z, n, N, surface, ctx)
        return float(abs(poly.evaluate(z, ctx) / predicted - 1))
    data = op_sequence(point, n, ctx)
    if quantity == Quantity.GAMMA_SQ:
        return float(abs(ctx.convert(data.gamma(n)) - predict_gamma_sq(n, geometry, ctx)))
    # the sign of the h_n prediction is not reliable; compare moduli on a log scale
    exact = abs(ctx.convert(data.norm(n)))
    return float(abs(mp.log(exact) - mp.log(abs(predict_h(n, N, geometry, ctx)))))


def error_table(quantity: Quantity, t, n_min: int, n_max: int, ctx: PrecisionContext,
                sequence: ScalingSequence = ScalingSequence.DIAGONAL, z=3, x=-3) -> AsymptoticReport:
    """
    Run the exact pipeline and the predictor for n_min <= n <= n_max. z is the evaluation
    point of P_outer and x the scaled Painlevé-IV variable.
    """
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"invalid degree range [{n_min}, {n_max}]")
    quantity = Quantity(quantity)
    t = ctx.convert(t)
    geometry = two_cut_geometry(t, ctx, classify=False)
    surface = surface_data(geometry, ctx) if quantity == Quantity.P_OUTER else None
    z = ctx.convert(z)
    report = AsymptoticReport(
        quantity=quantity, t=complex(t), n_range=(n_min, n_max), sequence=ScalingSequence(sequence),
    )
    for n in range(n_min, n_max + 1):
        err = _exact_error(quantity, n, t, geometry, report.sequence, ctx, z, x, surface)
        report.errors.append((n, err))
        logging.info(f"{quantity.value} n={n}: error {err:.3e}")
    report.decay_fit = decay_exponent(report.errors, parity=0)
    report.decay_fit_odd = decay_exponent(report.errors, parity=1)
    return report
