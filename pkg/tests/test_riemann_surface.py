"""
Tests for the genus-one surface: periods, Abel map, theta quotients and the quarter-root functions
"""
import numpy as np
import pytest

from core.errors import NearPole, OnCutError
from geometry.riemann_surface import (
    ab_boundary_values,
    ab_jump_residual,
    abel_map,
    abel_zero_defect,
    build_theta_evaluator,
    gamma_ab,
    quartic_root_gamma,
    reduce_lattice,
    riemann_theta,
    surface_data,
    theta_identity_residual,
    theta_ratio,
    theta_ratio_at_zero,
)
from geometry.spectral_curve import two_cut_geometry


def _two_cut_samples(count, seed):
    """Seeded t with real part in [-4, -3] and imaginary part in [-0.3, 0.3], inside the two-cut region"""
    rng = np.random.default_rng(seed)
    return [complex(re, im) for re, im in zip(rng.uniform(-4, -3, size=count), rng.uniform(-0.3, 0.3, size=count))]


TWO_CUT_SAMPLES = _two_cut_samples(10, seed=1902)


@pytest.fixture(scope="module")
def surface(ctx):
    return surface_data(two_cut_geometry(-3, ctx, classify=False), ctx)


class TestPeriods:
    """Normalization, beta-period and the Abel images of 0 and infinity"""

    def test_beta_period_in_upper_half_plane(self, ctx, surface):
        assert ctx.mp.im(ctx.convert(surface.B)) > 0

    def test_abel_infinity(self, ctx, surface):
        """𝒜(infinity^(0)) = 1/4 and the other sheet is its negative"""
        mp = ctx.mp
        assert abs(surface.abel_infinity(0, ctx) - mp.mpf(0.25)) < mp.mpf(10) ** -20
        assert surface.abel_infinity(1, ctx) == -surface.abel_infinity(0, ctx)

    def test_abel_zeros(self, ctx, surface):
        """The two preimages of 0 are half a period apart"""
        mp = ctx.mp
        difference = surface.abel_zero(0, ctx) - surface.abel_zero(1, ctx)
        assert abs(difference - mp.mpf(0.5)) < mp.mpf(10) ** -25
        assert abel_zero_defect(surface, ctx) < mp.mpf(10) ** -25

    @pytest.mark.parametrize("t", TWO_CUT_SAMPLES)
    def test_abel_zeros_at_random_t(self, ctx, t):
        """𝒜(0^(0)) - 𝒜(0^(1)) is 1/2 modulo the lattice across the two-cut region"""
        surface = surface_data(two_cut_geometry(t, ctx, classify=False), ctx)
        assert ctx.mp.im(ctx.convert(surface.B)) > 0
        assert abel_zero_defect(surface, ctx) < ctx.mp.mpf(10) ** -10


class TestAbelMap:
    """𝒜^(k)(z) off the cuts"""

    def test_sheets_are_opposite(self, ctx, surface):
        z = ctx.mp.mpc("0.5", "1.5")
        assert abs(abel_map(z, 0, surface, ctx) + abel_map(z, 1, surface, ctx)) < ctx.mp.mpf(10) ** -30

    def test_tends_to_infinity_image(self, ctx, surface):
        """𝒜^(0)(z) -> 𝒜(infinity^(0)) like 1/z"""
        value = abel_map(ctx.mp.mpc(0, 10**4), 0, surface, ctx)
        assert abs(value - surface.abel_infinity(0, ctx)) < 1e-3

    def test_gap_is_refused(self, ctx, surface):
        with pytest.raises(OnCutError, match="gap"):
            abel_map("0.5", 0, surface, ctx)

    def test_cut_is_refused(self, ctx, surface):
        with pytest.raises(OnCutError):
            abel_map(2, 0, surface, ctx)

    def test_bad_sheet(self, ctx, surface):
        with pytest.raises(ValueError, match="sheet"):
            abel_map(3, 2, surface, ctx)


class TestTheta:
    """Riemann theta and the quotient built from it"""

    def test_quasi_periodicity(self, ctx, surface):
        """theta(x + 1) = theta(x), theta(x + B) = e^(-pi i (B + 2x)) theta(x)"""
        mp = ctx.mp
        evaluator = build_theta_evaluator(surface.B, ctx)
        B = ctx.convert(surface.B)
        x = mp.mpc("0.17", "0.05")
        value = riemann_theta(x, evaluator, ctx)
        assert abs(riemann_theta(x + 1, evaluator, ctx) - value) < mp.mpf(10) ** -25
        shifted = riemann_theta(x + B, evaluator, ctx)
        assert abs(shifted - mp.exp(-mp.pi * mp.j * (B + 2 * x)) * value) < mp.mpf(10) ** -25 * abs(shifted)

    def test_theta_is_even(self, ctx, surface):
        mp = ctx.mp
        evaluator = build_theta_evaluator(surface.B, ctx)
        x = mp.mpc("0.31", "-0.12")
        assert abs(riemann_theta(-x, evaluator, ctx) - riemann_theta(x, evaluator, ctx)) < mp.mpf(10) ** -30

    def test_zero_of_theta(self, ctx, surface):
        """theta vanishes at the half period (B + 1)/2"""
        mp = ctx.mp
        evaluator = build_theta_evaluator(surface.B, ctx)
        assert abs(riemann_theta((ctx.convert(surface.B) + 1) / 2, evaluator, ctx)) < mp.mpf(10) ** -25

    def test_identity_at_infinity(self, ctx, surface):
        """Theta^(0)(infinity)/Theta^(1)(infinity) = 4/(a_2 - b_2)^2"""
        mp = ctx.mp
        assert float(4 / (1 - mp.sqrt(5)) ** 2) == pytest.approx(2.6180340, abs=1e-7)
        assert theta_identity_residual(surface, ctx) < mp.mpf(10) ** -12

    def test_zero_and_pole(self, ctx, surface):
        """Theta has its zero at 0^(1) and its pole at 0^(0)"""
        assert abs(theta_ratio_at_zero(1, surface, ctx)) < ctx.mp.mpf(10) ** -20
        with pytest.raises(NearPole):
            theta_ratio_at_zero(0, surface, ctx)

    def test_ratio_off_the_cuts(self, ctx, surface):
        """Theta^(0) Theta^(1) is finite away from z = 0"""
        z = ctx.mp.mpc("0.5", "1.5")
        value = theta_ratio(z, 0, surface, ctx) * theta_ratio(z, 1, surface, ctx)
        assert ctx.mp.isfinite(value)

    def test_theta_needs_upper_half_plane(self, ctx):
        with pytest.raises(ValueError, match="Im B > 0"):
            build_theta_evaluator(ctx.mp.mpc(0.5, -1), ctx)

    def test_reduce_lattice(self, ctx):
        """x = reduced + m + n B"""
        mp = ctx.mp
        B = mp.mpc("0.25", "1.5")
        base = mp.mpc("0.3", "0.2")
        reduced, m, n = reduce_lattice(base + 2 + 3 * B, B, ctx)
        assert (m, n) == (2, 3)
        assert abs(reduced - base) < mp.mpf(10) ** -30


class TestQuarterRoots:
    """gamma(z) and A, B built from it"""

    def test_gamma_at_infinity(self, ctx):
        geometry = two_cut_geometry(-3, ctx, classify=False)
        assert abs(quartic_root_gamma(10**8, geometry, ctx) - 1) < 1e-7

    def test_a_squared_plus_b_squared(self, ctx):
        mp = ctx.mp
        geometry = two_cut_geometry(-3, ctx, classify=False)
        values = gamma_ab(mp.mpc("0.4", "0.9"), geometry, ctx)
        A, B = ctx.convert(values.A), ctx.convert(values.B)
        assert abs(A * A + B * B - 1) < mp.mpf(10) ** -30

    @pytest.mark.parametrize("x", [2, "1.5", -2])
    def test_jumps(self, ctx, x):
        """A_+ = -B_- and A_- = B_+ on the cuts"""
        geometry = two_cut_geometry(-3, ctx, classify=False)
        assert ab_jump_residual(x, geometry, ctx) < ctx.mp.mpf(10) ** -25

    @pytest.mark.parametrize("x", [2, -2])
    def test_jump_sign_convention(self, ctx, x):
        """With + on the left of each cut, gamma_- = -i gamma_+ and A_+ is -B_-, not B_-"""
        geometry = two_cut_geometry(-3, ctx, classify=False)
        values = ab_boundary_values(x, geometry, ctx)
        assert abs(values["A+"] + values["B-"]) < ctx.mp.mpf(10) ** -25
        assert abs(values["A+"] - values["B-"]) > 0.5
        assert abs(values["A-"] - values["B+"]) < ctx.mp.mpf(10) ** -25


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
