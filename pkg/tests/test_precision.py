"""
Tests for the precision core: PrecisionComplex, PrecisionContext and the special functions
"""
import numpy as np
import pytest

from core import precision
from core.errors import NonConvergence, NumericOverflow, PoleAtNonPositiveInteger
from core.precision import (
    PrecisionComplex,
    PrecisionContext,
    gamma_fn,
    laurent_coefficient,
    pcf_D,
    pcf_D_prime,
    pcf_derivative_sequence,
    pcf_recurrence_residual,
    pcf_value,
    scaled_pcf,
)


def _recurrence_samples(count, seed):
    """Seeded (nu, z) pairs with nu in {-5/2, ..., 1/2} and z uniform in the disk |z| <= 5"""
    rng = np.random.default_rng(seed)
    orders = rng.choice([-2.5, -1.5, -0.5, 0.5], size=count)
    radius = 5 * np.sqrt(rng.uniform(size=count))
    angle = 2 * np.pi * rng.uniform(size=count)
    return [(float(nu), complex(r * np.cos(a), r * np.sin(a))) for nu, r, a in zip(orders, radius, angle)]


RECURRENCE_SAMPLES = _recurrence_samples(100, seed=1208)


class TestPrecisionComplex:
    """Construction, promotion and failure states of the universal scalar"""

    def test_minimum_precision(self):
        """Precisions below 64 bits are rejected"""
        with pytest.raises(ValueError, match="at least 64"):
            PrecisionComplex.from_value(1, 32)

    def test_mixed_precision_promotes(self):
        """Arithmetic between 128 and 256 bit operands is carried out at 256 bits"""
        a = PrecisionComplex.from_value(1, 128)
        b = PrecisionComplex.from_value("0.1", 256)
        assert (a + b).prec_bits == 256
        assert (b * a).prec_bits == 256
        assert (a - 2).prec_bits == 128

    def test_non_finite_is_explicit(self, ctx):
        """An infinite component raises instead of propagating silently"""
        with pytest.raises(NumericOverflow):
            PrecisionComplex(ctx.mp.inf, ctx.mp.mpf(0), 128)

    def test_add_then_subtract(self, ctx):
        """(a + b) - b returns a to working precision"""
        a = ctx.wrap(ctx.mp.mpf(1) / 3)
        b = ctx.wrap(ctx.mp.mpc("1e-5", "2"))
        assert abs(((a + b) - b) - a) < ctx.mp.mpf(2) ** -120

    def test_strings_carry_full_precision(self):
        """as_strings keeps at least the decimal digits the precision supports"""
        value = PrecisionComplex.from_value("0.333333333333333333333333333333333333", 128)
        re, im = value.as_strings()
        assert re.startswith("0.33333333333333333333333333333333")
        assert float(im) == 0.0


class TestPrecisionContext:
    """Derived tolerances of a working context"""

    def test_tolerances_are_ordered(self, ctx):
        """cut_tol < zero_tol < check_tol and series_tol is 2^-(p-8)"""
        assert ctx.cut_tol < ctx.zero_tol < ctx.check_tol
        assert ctx.series_tol == ctx.mp.ldexp(1, -120)

    def test_series_tol_must_be_tight(self):
        """A series tolerance of 2^-32 or more is refused"""
        with pytest.raises(ValueError, match="series_tol"):
            PrecisionContext(128, series_tol=2.0 ** -20)

    def test_contexts_are_independent(self):
        """Each context owns its mpmath precision"""
        low = PrecisionContext(64)
        high = PrecisionContext(512)
        assert low.mp.prec == 64
        assert high.mp.prec == 512
        assert high.doubled().prec_bits == 1024


class TestParabolicCylinder:
    """D_nu through the confluent series, against closed forms and mpmath's pcfd"""

    def test_value_at_origin(self, ctx):
        """D_{-1/2}(0) = sqrt(pi) 2^(-1/4) / Gamma(3/4)"""
        mp = ctx.mp
        expected = mp.sqrt(mp.pi) * mp.power(2, -mp.mpf(0.25)) / mp.gamma(mp.mpf(0.75))
        value = pcf_D(-0.5, 0, ctx)
        assert abs(value - expected) < mp.mpf(10) ** -35

    def test_order_zero_is_gaussian(self, ctx):
        """D_0(z) = exp(-z^2/4)"""
        mp = ctx.mp
        assert abs(pcf_D(0, 1, ctx) - mp.exp(-mp.mpf(0.25))) < mp.mpf(10) ** -35

    def test_order_one(self, ctx):
        """D_1(z) = z exp(-z^2/4)"""
        mp = ctx.mp
        z = mp.mpc(0.3, -1.2)
        assert abs(pcf_value(ctx, 1, z) - z * mp.exp(-z * z / 4)) < mp.mpf(10) ** -34

    @pytest.mark.parametrize("nu,z", [(-1.5, (2, 1)), (-0.5, (-1.5, 0.5)), (-2.5, (0.7, -3))])
    def test_matches_mpmath(self, ctx, nu, z):
        """Agreement with mpmath's own parabolic cylinder function"""
        mp = ctx.mp
        point = mp.mpc(*z)
        expected = mp.pcfd(nu, point)
        assert abs(pcf_value(ctx, nu, point) - expected) <= mp.mpf(10) ** -30 * max(1, abs(expected))

    def test_recurrence_residual(self, ctx):
        """D_{nu+1} - z D_nu + nu D_{nu-1} vanishes at (-1/2, 1+i)"""
        residual = pcf_recurrence_residual(-0.5, ctx.mp.mpc(1, 1), ctx)
        assert abs(residual) <= 10 * ctx.series_tol

    @pytest.mark.parametrize("nu", [-2.5, -1.5, -0.5, 0.5])
    def test_recurrence_residual_grid(self, ctx, nu):
        """The three-term recurrence holds across orders on a few points of |z| <= 5"""
        mp = ctx.mp
        for z in (mp.mpc(4, 2), mp.mpc(-1, 3), mp.mpc(0.5, 0)):
            scale = max(1, abs(pcf_value(ctx, nu, z)) * abs(z))
            assert abs(pcf_recurrence_residual(nu, z, ctx)) <= 100 * ctx.series_tol * scale

    @pytest.mark.parametrize("nu,z", RECURRENCE_SAMPLES)
    def test_recurrence_residual_sweep(self, ctx, nu, z):
        """DLMF 12.8.1 at 100 seeded points, relative to the largest of its three terms"""
        z = ctx.convert(z)
        terms = (pcf_value(ctx, nu + 1, z), z * pcf_value(ctx, nu, z), nu * pcf_value(ctx, nu - 1, z))
        scale = max([1] + [abs(term) for term in terms])
        assert abs(pcf_recurrence_residual(nu, z, ctx)) <= 100 * ctx.series_tol * scale

    def test_derivative_at_origin(self, ctx):
        """D'_{-1/2}(0) = -2^(1/4) sqrt(pi) / Gamma(1/4) and D'_0(0) = 0"""
        mp = ctx.mp
        expected = -mp.power(2, mp.mpf(0.25)) * mp.sqrt(mp.pi) / mp.gamma(mp.mpf(0.25))
        assert abs(pcf_D_prime(-0.5, 0, ctx) - expected) < mp.mpf(10) ** -35
        assert abs(pcf_D_prime(0, 0, ctx)) < mp.mpf(10) ** -35

    def test_derivative_against_finite_differences(self, ctx):
        """The contiguous-relation derivative agrees with numerical differentiation"""
        mp = ctx.mp
        z = mp.mpc(0.7, -0.2)
        numeric = mp.diff(lambda w: pcf_value(ctx, -1.5, w), z)
        assert abs(pcf_D_prime(-1.5, z, ctx) - numeric) < mp.mpf(2) ** -64

    def test_precision_consistency(self, ctx, ctx256):
        """The value at 256 bits agrees with the 128 bit value to the base tolerance"""
        z = "2.5"
        low = pcf_D(-1.5, z, ctx)
        high = pcf_D(-1.5, z, ctx256)
        assert abs(ctx.convert(high) - ctx.convert(low)) <= 10 * ctx.series_tol * abs(ctx.convert(low))

    def test_scaled_derivative_sequence(self, ctx):
        """phi_nu' = nu phi_{nu-1} with phi_nu(s) = e^(s^2/4) D_nu(s)"""
        mp = ctx.mp
        s = mp.mpf(0.8)
        entries = pcf_derivative_sequence(ctx, -0.5, s, 1, 2)
        numeric = mp.diff(lambda y: scaled_pcf(ctx, -0.5, y), s)
        assert abs(entries[0] - scaled_pcf(ctx, -0.5, s)) == 0
        assert abs(entries[1] - numeric) < mp.mpf(2) ** -64



class TestEscalation:
    """scaled_pcf once the guard bits are exhausted"""

    def test_unresolved_cancellation_raises(self, ctx, monkeypatch):
        """A value that never stops losing bits is a failure, not a zero"""
        monkeypatch.setattr(precision, "_scaled_pcf_attempt", lambda mp, nu, s: (mp.mpc(1), 1e6))
        with pytest.raises(NonConvergence, match="lost"):
            scaled_pcf(ctx, -0.5, 1)

    def test_complete_cancellation_to_zero(self, ctx, monkeypatch):
        """Both series cancelling exactly gives 0"""
        monkeypatch.setattr(precision, "_scaled_pcf_attempt", lambda mp, nu, s: (mp.mpc(0), float("inf")))
        assert scaled_pcf(ctx, -0.5, 1) == 0

    def test_large_value_is_never_reported_as_zero(self, ctx, monkeypatch):
        monkeypatch.setattr(precision, "_scaled_pcf_attempt", lambda mp, nu, s: (mp.mpc(1), float("inf")))
        with pytest.raises(NonConvergence):
            scaled_pcf(ctx, -0.5, 1)

def test_gamma_values(ctx):
    """Gamma(1) = 1, Gamma(1/2) = sqrt(pi) and Gamma(1/4) Gamma(3/4) = pi sqrt(2)"""
    mp = ctx.mp
    assert abs(gamma_fn(1, ctx) - 1) < mp.mpf(10) ** -35
    assert abs(gamma_fn(0.5, ctx) - mp.sqrt(mp.pi)) < mp.mpf(10) ** -35
    product = ctx.convert(gamma_fn(0.25, ctx)) * ctx.convert(gamma_fn(0.75, ctx))
    assert abs(product - mp.pi * mp.sqrt(2)) < mp.mpf(10) ** -35
    assert abs(ctx.convert(gamma_fn(0.25, ctx)) - mp.mpf("3.6256099082219083119")) < mp.mpf(10) ** -18


@pytest.mark.parametrize("z", [0, -3])
def test_gamma_poles(ctx, z):
    """Gamma raises at non-positive integers"""
    with pytest.raises(PoleAtNonPositiveInteger, match="pole"):
        gamma_fn(z, ctx)


def test_laurent_coefficient(ctx):
    """The trapezoidal rule on a circle recovers Laurent coefficients of a short series"""
    mp = ctx.mp

    def fun(z):
        return 1 / z + 2 + 3 * z

    assert abs(laurent_coefficient(fun, -1, 1, 16, ctx) - 1) < mp.mpf(10) ** -30
    assert abs(laurent_coefficient(fun, 0, 1, 16, ctx) - 2) < mp.mpf(10) ** -30
    assert abs(laurent_coefficient(fun, 1, 0.5, 16, ctx) - 3) < mp.mpf(10) ** -30


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
