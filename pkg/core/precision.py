"""
Arbitrary precision scalars and the special functions every other package builds on.

Each PrecisionContext owns a private mpmath context, so precision never leaks through
global state. Routines read the precision of that context at call time, which lets
mpmath's numerical differentiation raise it temporarily and get accurate samples back.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from core.errors import NonConvergence, NumericOverflow, PoleAtNonPositiveInteger

MIN_PREC_BITS = 64
ESCALATION_BITS = 32
MAX_ESCALATIONS = 4


@lru_cache(maxsize=None)
def _context_for(prec_bits: int) -> mpmath.MPContext:
    mp = mpmath.MPContext()
    mp.prec = prec_bits
    return mp


def _to_mp(mp: mpmath.MPContext, value):
    if isinstance(value, PrecisionComplex):
        return mp.mpc(value.re, value.im)
    if isinstance(value, Fraction):
        return mp.mpc(mp.mpf(value.numerator) / value.denominator)
    if isinstance(value, str):
        try:
            return mp.mpc(mp.mpf(value))
        except ValueError:
            parsed = complex(value.replace(" ", ""))
            return mp.mpc(parsed.real, parsed.imag)
    return mp.mpc(value)


@dataclass(frozen=True)
class PrecisionComplex:
    """
    Immutable complex value tagged with the binary precision it was produced at.
    Mixed-precision arithmetic promotes to the larger precision.
    """
    re: mpmath.mpf
    im: mpmath.mpf
    prec_bits: int

    def __post_init__(self):
        if self.prec_bits < MIN_PREC_BITS:
            raise ValueError(f"prec_bits must be at least {MIN_PREC_BITS}, got {self.prec_bits}")
        mp = _context_for(self.prec_bits)
        re, im = mp.mpf(self.re), mp.mpf(self.im)
        if not (mp.isfinite(re) and mp.isfinite(im)):
            raise NumericOverflow(f"non-finite value ({re}, {im}) at {self.prec_bits} bits")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def from_value(cls, value, prec_bits: int) -> "PrecisionComplex":
        mp = _context_for(prec_bits)
        converted = _to_mp(mp, value)
        return cls(converted.real, converted.imag, prec_bits)

    @property
    def value(self) -> mpmath.mpc:
        return _context_for(self.prec_bits).mpc(self.re, self.im)

    def _promote(self, other):
        bits = max(self.prec_bits, other.prec_bits) if isinstance(other, PrecisionComplex) else self.prec_bits
        mp = _context_for(bits)
        return mp, bits, mp.mpc(self.re, self.im), _to_mp(mp, other)

    def __add__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(lhs + rhs, bits)

    __radd__ = __add__

    def __sub__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(lhs - rhs, bits)

    def __rsub__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(rhs - lhs, bits)

    def __mul__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(lhs * rhs, bits)

    __rmul__ = __mul__

    def __truediv__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(lhs / rhs, bits)

    def __rtruediv__(self, other):
        mp, bits, lhs, rhs = self._promote(other)
        return PrecisionComplex.from_value(rhs / lhs, bits)

    def __neg__(self):
        return PrecisionComplex(-self.re, -self.im, self.prec_bits)

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "PrecisionComplex":
        return PrecisionComplex(self.re, -self.im, self.prec_bits)

    def digits(self) -> int:
        return max(int(self.prec_bits * 0.30103), 15)

    def as_strings(self) -> tuple[str, str]:
        """Decimal strings carrying the full precision of the value."""
        mp = _context_for(self.prec_bits)
        return mp.nstr(self.re, self.digits()), mp.nstr(self.im, self.digits())

    def __str__(self):
        return _context_for(self.prec_bits).nstr(self.value, 20)


class PrecisionContext:
    """
    Working precision plus the tolerances derived from it.

    series_tol bounds series truncation, check_tol is used by cross-validation,
    cut_tol is the distance below which a point counts as lying on a branch cut and
    zero_tol is the relative threshold of determinant zero tests.
    """

    def __init__(self, prec_bits: int = 128, series_tol=None):
        if prec_bits < MIN_PREC_BITS:
            raise ValueError(f"prec_bits must be at least {MIN_PREC_BITS}, got {prec_bits}")
        self.prec_bits = int(prec_bits)
        self.mp = mpmath.MPContext()
        self.mp.prec = self.prec_bits
        tol = self.mp.ldexp(1, -self.prec_bits + 8) if series_tol is None else self.mp.mpf(series_tol)
        if not tol < self.mp.ldexp(1, -32):
            raise ValueError(f"series_tol must be below 2^-32, got {tol}")
        self.series_tol = tol

    def __repr__(self):
        return f"PrecisionContext(prec_bits={self.prec_bits})"

    @property
    def check_tol(self):
        return self.mp.ldexp(1, -(self.prec_bits // 4))

    @property
    def cut_tol(self):
        return self.mp.ldexp(1, -(3 * self.prec_bits // 4))

    @property
    def zero_tol(self):
        return self.mp.ldexp(1, -(self.prec_bits // 2))

    def with_prec(self, prec_bits: int) -> "PrecisionContext":
        return PrecisionContext(prec_bits)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.prec_bits)

    def convert(self, value) -> mpmath.mpc:
        return _to_mp(self.mp, value)

    def real(self, value) -> mpmath.mpf:
        converted = self.convert(value)
        if converted.imag != 0:
            raise ValueError(f"expected a real value, got {converted}")
        return converted.real

    def wrap(self, value) -> PrecisionComplex:
        return PrecisionComplex.from_value(value, max(self.mp.prec, MIN_PREC_BITS))


def _kummer_series(mp, a, b, x):
    """Sum of M(a, b, x) together with the largest term seen, for cancellation estimates."""
    term = mp.mpc(1)
    total = term
    peak = mp.mpf(1)
    hump = abs(x) + abs(a) + 2
    max_terms = int(8 * hump) + 4 * mp.prec + 100
    k = 0
    while True:
        term = term * (a + k) * x / ((b + k) * (k + 1))
        k += 1
        total += term
        size = abs(term)
        if size > peak:
            peak = size
        if term == 0:
            return total, peak
        if k > hump and (size <= mp.eps * abs(total) or size <= mp.eps * mp.eps * peak):
            return total, peak
        if k >= max_terms:
            raise NonConvergence(f"confluent series M({a}, {b}, {x}) did not converge in {k} terms")


def _scaled_pcf_attempt(mp, nu, s):
    a = -nu - mp.mpf(0.5)
    x = s * s / 2
    root_pi = mp.sqrt(mp.pi)
    u0 = root_pi * mp.power(2, -(a / 2 + mp.mpf(0.25))) * mp.rgamma(mp.mpf(0.75) + a / 2)
    u1 = -root_pi * mp.power(2, -(a / 2 - mp.mpf(0.25))) * mp.rgamma(mp.mpf(0.25) + a / 2)
    even, peak_even = _kummer_series(mp, a / 2 + mp.mpf(0.25), mp.mpf(0.5), x)
    odd, peak_odd = _kummer_series(mp, a / 2 + mp.mpf(0.75), mp.mpf(1.5), x)
    combined = u0 * even + u1 * s * odd
    scale = max(abs(u0) * peak_even, abs(u1 * s) * peak_odd)
    if scale == 0:
        return combined, 0.0
    if combined == 0:
        return combined, float("inf")
    return combined, float(mp.log(scale / abs(combined), 2))


def scaled_pcf(ctx: PrecisionContext, nu, s) -> mpmath.mpc:
    """
    e^{s^2/4} D_nu(s) at the current precision of ctx.

    D_nu is U(-nu-1/2, s) written as the even and odd confluent series about 0. The
    two series cancel for moderate |s|; the estimated loss decides whether to retry
    with 32 more guard bits.
    """
    mp = ctx.mp
    nu = ctx.convert(nu)
    s = ctx.convert(s)
    target = mp.prec
    guard = int(0.75 * float(abs(s)) ** 2) + 16
    value = mp.mpc(0)
    loss = float("inf")
    for attempt in range(MAX_ESCALATIONS + 1):
        with mp.workprec(target + guard):
            value, loss = _scaled_pcf_attempt(mp, nu, s)
        if loss + 8 <= guard:
            return +value
        if loss == float("inf"):
            break
        if attempt < MAX_ESCALATIONS:
            logging.warning(
                f"Cancellation of {loss:.1f} bits in D_{mp.nstr(nu, 8)}({mp.nstr(s, 8)}) "
                f"at {target + guard} bits; escalating precision"
            )
            guard = max(guard + ESCALATION_BITS, min(int(loss) + 16, guard + 8 * ESCALATION_BITS))
    if loss >= target + guard - 8 and abs(value) < ctx.zero_tol:
        logging.warning(f"D_{mp.nstr(nu, 8)}({mp.nstr(s, 8)}) cancels to below {mp.nstr(ctx.zero_tol, 3)}; returning 0")
        return mp.mpc(0)
    raise NonConvergence(
        f"D_{mp.nstr(nu, 8)}({mp.nstr(s, 8)}) lost {loss:.1f} bits after {MAX_ESCALATIONS} escalations; "
        f"raise prec_bits"
    )


def pcf_value(ctx: PrecisionContext, nu, z) -> mpmath.mpc:
    z = ctx.convert(z)
    return ctx.mp.exp(-z * z / 4) * scaled_pcf(ctx, nu, z)


def pcf_D(nu, z, ctx: PrecisionContext) -> PrecisionComplex:
    """Parabolic cylinder function D_nu(z) in the Whittaker convention."""
    return ctx.wrap(pcf_value(ctx, nu, z))


def pcf_D_prime(nu, z, ctx: PrecisionContext) -> PrecisionComplex:
    nu = ctx.convert(nu)
    z = ctx.convert(z)
    derivative = z / 2 * pcf_value(ctx, nu, z) - pcf_value(ctx, nu + 1, z)
    return ctx.wrap(derivative)


def pcf_recurrence_residual(nu, z, ctx: PrecisionContext) -> PrecisionComplex:
    """D_{nu+1}(z) - z D_nu(z) + nu D_{nu-1}(z), which vanishes identically."""
    nu = ctx.convert(nu)
    z = ctx.convert(z)
    residual = pcf_value(ctx, nu + 1, z) - z * pcf_value(ctx, nu, z) + nu * pcf_value(ctx, nu - 1, z)
    return ctx.wrap(residual)


def pcf_derivative_sequence(ctx: PrecisionContext, nu, s, scale, count: int) -> list:
    """
    The first `count` derivatives of y -> phi_nu(scale * y) at the point with scale * y = s,
    where phi_nu(s) = e^{s^2/4} D_nu(s). Uses phi_nu' = nu * phi_{nu-1}.
    """
    mp = ctx.mp
    nu = ctx.convert(nu)
    s = ctx.convert(s)
    scale = ctx.convert(scale)
    entries = []
    factor = mp.mpc(1)
    for j in range(count):
        entries.append(factor * scaled_pcf(ctx, nu - j, s))
        factor *= scale * (nu - j)
    return entries


def gamma_fn(z, ctx: PrecisionContext) -> PrecisionComplex:
    mp = ctx.mp
    z = ctx.convert(z)
    if z.imag == 0 and z.real <= 0 and z.real == mp.floor(z.real):
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at {mp.nstr(z.real, 10)}")
    return ctx.wrap(mp.gamma(z))


def laurent_coefficient(fun, k: int, radius, samples: int, ctx: PrecisionContext) -> mpmath.mpc:
    """Coefficient of z^k in the Laurent expansion of fun on the circle |z| = radius (trapezoidal rule)."""
    mp = ctx.mp
    radius = mp.mpf(radius)
    total = mp.mpc(0)
    for j in range(samples):
        z = radius * mp.expjpi(mp.mpf(2 * j) / samples)
        total += fun(z) * z ** (-k)
    return total / samples
