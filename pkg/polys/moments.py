"""
Moments of the quartic weight e^{-N V(s; t)}, V(s; t) = s^4/4 + t s^2/2, on the real axis.

Three independent routes are provided: the parabolic cylinder closed form, the four-term
recursion obtained by integrating by parts, and tanh-sinh quadrature. The quartic term
dominates for every complex t, so the real axis is always an admissible contour.
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import mpmath

from core.errors import QuadratureStall
from core.precision import PrecisionComplex, PrecisionContext, scaled_pcf


@dataclass(frozen=True)
class ModelPoint:
    """The parameters (t, N) of the weight, optionally with a degree index n."""
    t: PrecisionComplex
    N: int | float | str
    n: int | None = None

    def __post_init__(self):
        if not isinstance(self.t, PrecisionComplex):
            raise TypeError("ModelPoint.t must be a PrecisionComplex; use ModelPoint.of(...)")
        if not float(self.N) > 0:
            raise ValueError(f"N must be positive, got {self.N}")
        if self.n is not None and self.n < 0:
            raise ValueError(f"n must be nonnegative, got {self.n}")

    @classmethod
    def of(cls, t, N, n: int | None = None, prec_bits: int = 256) -> "ModelPoint":
        if not isinstance(t, PrecisionComplex):
            t = PrecisionComplex.from_value(t, prec_bits)
        return cls(t=t, N=N, n=n)

    def t_value(self, ctx: PrecisionContext) -> mpmath.mpc:
        return ctx.convert(self.t)

    def N_value(self, ctx: PrecisionContext) -> mpmath.mpf:
        return ctx.real(self.N)

    def with_t(self, t) -> "ModelPoint":
        if not isinstance(t, PrecisionComplex):
            t = PrecisionComplex.from_value(t, self.t.prec_bits)
        return replace(self, t=t)

    def check_double_scaling(self, bound: float) -> None:
        """Enforce |N - n| <= bound for double-scaling sequences."""
        if self.n is None:
            raise ValueError("check_double_scaling needs a degree index n")
        if abs(float(self.N) - self.n) > bound:
            raise ValueError(f"|N - n| = {abs(float(self.N) - self.n)} exceeds the declared bound {bound}")


class MomentProvenance(str, Enum):
    CLOSED_FORM = "closed_form"
    RECURSION = "recursion"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class MomentTable:
    point: ModelPoint
    mu: tuple[PrecisionComplex, ...]
    provenance: MomentProvenance

    @property
    def m(self) -> int:
        return (len(self.mu) - 1) // 2

    def values(self, ctx: PrecisionContext) -> list[mpmath.mpc]:
        return [ctx.convert(v) for v in self.mu]

    def recursion_residual(self, ctx: PrecisionContext) -> mpmath.mpf:
        """Largest relative residual of N mu_{k+4} = (k+1) mu_k - N t mu_{k+2} over the table."""
        mu = self.values(ctx)
        t = self.point.t_value(ctx)
        N = self.point.N_value(ctx)
        worst = ctx.mp.mpf(0)
        for k in range(0, len(mu) - 4, 2):
            lhs = N * mu[k + 4]
            rhs = (k + 1) * mu[k] - N * t * mu[k + 2]
            scale = max(abs(lhs), abs((k + 1) * mu[k]), abs(N * t * mu[k + 2]))
            if scale:
                worst = max(worst, abs(lhs - rhs) / scale)
        return worst


def _moment_prefactor(ctx: PrecisionContext, N):
    mp = ctx.mp
    return mp.power(2, mp.mpf(0.25)) * mp.sqrt(mp.pi) * mp.power(N, -mp.mpf(0.25))


def _closed_form_value(ctx: PrecisionContext, t, N, k: int):
    """mu_k from D_{-1/2-k/2}: mu_{2j} = C (2j-1)!! (2N)^{-j/2} e^{s^2/4} D_{-1/2-j}(s), s = t sqrt(N/2)."""
    mp = ctx.mp
    if k % 2:
        return mp.mpc(0)
    j = k // 2
    s = mp.sqrt(N / 2) * t
    double_factorial = mp.fac2(2 * j - 1) if j > 0 else mp.mpf(1)
    nu = -mp.mpf(0.5) - j
    return _moment_prefactor(ctx, N) * double_factorial * mp.power(2 * N, -mp.mpf(j) / 2) * scaled_pcf(ctx, nu, s)


def mu0(point: ModelPoint, ctx: PrecisionContext) -> PrecisionComplex:
    return ctx.wrap(_closed_form_value(ctx, point.t_value(ctx), point.N_value(ctx), 0))


def moment_closed_form(point: ModelPoint, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    if k < 0:
        raise ValueError(f"moment index must be nonnegative, got {k}")
    return ctx.wrap(_closed_form_value(ctx, point.t_value(ctx), point.N_value(ctx), k))


def _quadrature_cutoff(t, N, k: int, bits: int) -> float:
    """Half-width beyond which |s^k e^{-N V}| is below 2^-bits of the peak weight."""
    tr = float(t.real)
    n = float(N)
    v_min = -tr * tr / 4 if tr < 0 else 0.0
    target = bits * math.log(2) + 20
    cutoff = math.sqrt(max(-tr, 0.0)) + 1
    while n * (cutoff**4 / 4 + tr * cutoff**2 / 2 - v_min) - k * math.log(cutoff) < target:
        cutoff *= 1.25
    return cutoff


def _breakpoints(mp, cutoff: float, t) -> list:
    points = {mp.mpf(j) for j in range(-math.ceil(cutoff), math.ceil(cutoff) + 1)}
    if t.real < 0:
        well = mp.sqrt(-t.real)
        points.update({well, -well})
    return sorted(points)


def weighted_integral(integrand, point: ModelPoint, ctx: PrecisionContext, degree_hint: int = 0,
                      with_mass: bool = False):
    """
    Integrate integrand(s) e^{-N V(s; t)} over the real line by tanh-sinh quadrature on
    unit subintervals. Returns (value, mass) where mass is the integral of the modulus
    when requested and None otherwise.
    """
    mp = ctx.mp
    t = point.t_value(ctx)
    N = point.N_value(ctx)
    cutoff = _quadrature_cutoff(t, N, degree_hint, mp.prec)
    nodes = _breakpoints(mp, cutoff, t)

    def weighted(s):
        return integrand(s) * mp.exp(-N * (s**4 / 4 + t * s * s / 2))

    value, error = mp.quad(weighted, nodes, error=True)
    mass = mp.quad(lambda s: abs(weighted(s)), nodes) if with_mass else None
    scale = max(abs(value), mass) if mass is not None else abs(value)
    if error > mp.sqrt(ctx.series_tol) * scale:
        raise QuadratureStall(
            f"quadrature error estimate {mp.nstr(error, 5)} exceeds tolerance for |value| {mp.nstr(scale, 5)}"
        )
    return value, mass


def moment_quadrature_oracle(k: int, point: ModelPoint, ctx: PrecisionContext) -> PrecisionComplex:
    if k < 0:
        raise ValueError(f"moment index must be nonnegative, got {k}")
    if k % 2:
        return ctx.wrap(0)
    value, _ = weighted_integral(lambda s: s**k, point, ctx, degree_hint=k)
    return ctx.wrap(value)


def moment_table(point: ModelPoint, m: int, ctx: PrecisionContext,
                 provenance: MomentProvenance = MomentProvenance.RECURSION) -> MomentTable:
    """
    mu_0..mu_{2m}. The recursion route seeds with mu_0 and mu_2 and runs forward, which
    is mildly unstable, so it works with at least 64 + 8m bits plus a guard.
    """
    if m < 2:
        raise ValueError(f"moment tables need m >= 2, got {m}")
    mp = ctx.mp
    base_bits = mp.prec
    with mp.workprec(max(base_bits, 64 + 8 * m) + 16):
        t = point.t_value(ctx)
        N = point.N_value(ctx)
        if provenance == MomentProvenance.CLOSED_FORM:
            mu = [_closed_form_value(ctx, t, N, k) for k in range(2 * m + 1)]
        elif provenance == MomentProvenance.RECURSION:
            mu = [mp.mpc(0)] * (2 * m + 1)
            mu[0] = _closed_form_value(ctx, t, N, 0)
            mu[2] = _closed_form_value(ctx, t, N, 2)
            for k in range(0, 2 * m - 3, 2):
                mu[k + 4] = ((k + 1) * mu[k] - N * t * mu[k + 2]) / N
        else:
            mu = []
            for k in range(2 * m + 1):
                if k % 2:
                    mu.append(mp.mpc(0))
                else:
                    mu.append(weighted_integral(lambda s, k=k: s**k, point, ctx, degree_hint=k)[0])
    logging.info(f"Built {provenance.value} moment table to index {2 * m} at {base_bits} bits")
    return MomentTable(point=point, mu=tuple(ctx.wrap(+v) for v in mu), provenance=provenance)
