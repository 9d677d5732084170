"""
Tests for the two-cut geometry: branches, g-function, Szegő functions, trajectories and regions
"""
import numpy as np
import pytest

from core.errors import OffCutError, OnCutError
from geometry.spectral_curve import (
    BranchFunction,
    BranchKind,
    CutRealization,
    Region,
    SzegoKind,
    Termination,
    TrajectoryKind,
    classify_region,
    cut_mass,
    eta_b2,
    eta_e,
    g_boundary_sum,
    g_fun,
    g_gap_jump,
    g_prime,
    left_of_gamma,
    q_sqrt,
    q_sqrt_laurent,
    r_sqrt,
    re_eta,
    resolvent,
    short_trajectory_closes,
    sign_chart,
    szego,
    szego_at_infinity,
    szego_boundary_product,
    trace_trajectory,
    two_cut_geometry,
)


@pytest.fixture(scope="module")
def geometry(ctx):
    """t = -3: a_2 = 1, b_2 = sqrt(5)"""
    return two_cut_geometry(-3, ctx, classify=False)


def _tiny(ctx, digits=25):
    return ctx.mp.mpf(10) ** -digits


class TestEndpoints:
    """Endpoints, ell_* and the square roots"""

    def test_endpoints(self, ctx, geometry):
        mp = ctx.mp
        a2, b2 = geometry.endpoints(ctx)
        assert abs(a2 - 1) < _tiny(ctx, 35)
        assert abs(b2 - mp.sqrt(5)) < _tiny(ctx, 35)
        assert abs(ctx.convert(geometry.ell_star) - mp.mpf(7) / 4) < _tiny(ctx, 35)
        assert geometry.region == Region.UNKNOWN

    def test_r_sqrt(self, ctx, geometry):
        """R^(1/2)(3) = sqrt(R(3)) = sqrt(32) and R^(1/2) ~ z^2"""
        mp = ctx.mp
        assert abs(r_sqrt(3, geometry, ctx) - mp.sqrt(32)) < _tiny(ctx)
        assert abs(r_sqrt(-3, geometry, ctx) - mp.sqrt(32)) < _tiny(ctx)
        z = mp.mpc(40, 25)
        assert abs(r_sqrt(z, geometry, ctx) / (z * z) - 1) < 1e-2

    def test_r_sqrt_squares_to_r(self, ctx, geometry):
        mp = ctx.mp
        z = mp.mpc("0.3", "1.7")
        t = geometry.t_value(ctx)
        assert abs(r_sqrt(z, geometry, ctx) ** 2 - ((z * z + t) ** 2 - 4)) < _tiny(ctx)

    def test_q_sqrt(self, ctx, geometry):
        """Q^(1/2) = z R^(1/2)/2"""
        assert abs(q_sqrt(3, geometry, ctx) - 3 * ctx.mp.sqrt(32) / 2) < _tiny(ctx)

    @pytest.mark.parametrize("k,expected", [(3, "0.5"), (1, "-1.5"), (0, "0"), (-1, "-1")])
    def test_q_sqrt_at_infinity(self, ctx, geometry, k, expected):
        """Q^(1/2) = V'(z)/2 - 1/z + O(z^-3)"""
        assert abs(q_sqrt_laurent(k, geometry, ctx) - ctx.mp.mpf(expected)) < _tiny(ctx)

    def test_branch_function(self, ctx, geometry):
        value = BranchFunction(BranchKind.R_SQRT, geometry).evaluate(3, ctx)
        assert abs(ctx.convert(value) - ctx.mp.sqrt(32)) < _tiny(ctx)


class TestGFunction:
    """g, its derivative and its jumps"""

    def test_log_behaviour(self, ctx, geometry):
        """g(z) - log z -> 0 at infinity"""
        mp = ctx.mp
        assert abs(g_fun(1000, geometry, ctx) - mp.log(1000)) < 1e-5

    def test_derivative_is_resolvent(self, ctx, geometry):
        """g'(3) equals the Cauchy transform of the equilibrium measure"""
        mp = ctx.mp
        expected = 9 - 3 * mp.sqrt(32) / 2
        assert abs(g_prime(3, geometry, ctx) - expected) < _tiny(ctx)
        assert abs(resolvent(3, geometry, ctx) - expected) < _tiny(ctx, 15)
        assert float(mp.re(expected)) == pytest.approx(0.515, abs=1e-3)

    def test_numeric_derivative(self, ctx, geometry):
        mp = ctx.mp
        z = mp.mpc("2.5", "0.8")
        numeric = mp.diff(lambda w: g_fun(w, geometry, ctx), z)
        assert abs(numeric - g_prime(z, geometry, ctx)) < _tiny(ctx, 15)

    def test_boundary_sum(self, ctx, geometry):
        """g_+ + g_- = V + ell_* on the cuts"""
        assert abs(g_boundary_sum(2, geometry, ctx)) < _tiny(ctx, 15)
        assert abs(g_boundary_sum(-2, geometry, ctx)) < _tiny(ctx, 15)

    def test_gap_jump(self, ctx, geometry):
        """g_+ - g_- is purely imaginary of size pi across the gap"""
        jump = g_gap_jump(0.5, geometry, ctx)
        assert abs(ctx.mp.re(jump)) < 1e-8
        assert abs(abs(jump) - ctx.mp.pi) < 1e-8

    def test_boundary_sum_needs_a_cut(self, ctx, geometry):
        with pytest.raises(OffCutError):
            g_boundary_sum(3, geometry, ctx)


class TestEta:
    """eta = -2 int Q^(1/2) and its real part"""

    def test_vanishes_at_b2(self, ctx, geometry):
        assert eta_b2(geometry.b2, geometry, ctx) == 0

    def test_real_beyond_b2(self, ctx, geometry):
        """Beyond b_2 eta is real and equals Re eta"""
        value = eta_b2(3, geometry, ctx)
        assert abs(ctx.mp.im(value)) < _tiny(ctx)
        assert abs(ctx.mp.re(value) - re_eta(3, geometry, ctx)) < _tiny(ctx)
        assert re_eta(3, geometry, ctx) < 0

    def test_re_eta_vanishes_on_cuts(self, ctx, geometry):
        assert abs(re_eta(ctx.mp.mpc(2, "1e-20"), geometry, ctx)) < 1e-15

    def test_base_endpoints(self, ctx, geometry):
        """eta_{a_2} differs from eta_{b_2} by pi i"""
        mp = ctx.mp
        z = mp.mpc(1, 2)
        difference = eta_e(z, "a2", geometry, ctx) - eta_b2(z, geometry, ctx)
        assert abs(abs(difference) - mp.pi) < _tiny(ctx)
        difference = eta_e(z, "-b2", geometry, ctx) - eta_b2(z, geometry, ctx)
        assert abs(abs(difference) - 2 * mp.pi) < _tiny(ctx)
        with pytest.raises(ValueError, match="unknown base endpoint"):
            eta_e(z, "c", geometry, ctx)

    def test_on_cut(self, ctx, geometry):
        with pytest.raises(OnCutError, match="J2"):
            eta_b2(2, geometry, ctx)
        with pytest.raises(OnCutError, match="Gamma"):
            eta_b2(-5, geometry, ctx)

    def test_sides_of_gamma(self, ctx, geometry):
        assert left_of_gamma(ctx.mp.mpc(0, 5), geometry, ctx)
        assert not left_of_gamma(ctx.mp.mpc(0, -5), geometry, ctx)


class TestSzego:
    """The two normalizations of the Szegő function"""

    def test_normalized_at_infinity(self, ctx, geometry):
        assert abs(szego(1000, geometry, SzegoKind.D_NORM, ctx) - 1) < 1e-4
        assert szego_at_infinity(geometry, SzegoKind.D_NORM, ctx) == 1

    def test_calligraphic_at_infinity(self, ctx, geometry):
        """script-D(infinity) = e^(-ell_*/2) = e^(-7/8)"""
        mp = ctx.mp
        limit = szego_at_infinity(geometry, SzegoKind.D_CAL, ctx)
        assert abs(limit - mp.exp(-mp.mpf(7) / 8)) < _tiny(ctx)
        assert abs(szego(1000, geometry, SzegoKind.D_CAL, ctx) - mp.mpf("0.4168620")) < 1e-4

    def test_boundary_product(self, ctx, geometry):
        """script-D_+ script-D_- = e^V on the cuts"""
        assert abs(szego_boundary_product(2, geometry, ctx) - 1) < _tiny(ctx)
        assert abs(szego_boundary_product(-2, geometry, ctx) - 1) < _tiny(ctx)

    def test_off_cuts_only(self, ctx, geometry):
        with pytest.raises(OnCutError):
            szego(2, geometry, SzegoKind.D_CAL, ctx)


class TestMeasure:
    """The equilibrium measure splits evenly between the cuts"""

    @pytest.mark.parametrize("cut", ["J1", "J2"])
    def test_chord_mass(self, ctx, geometry, cut):
        mass = cut_mass(geometry, cut, ctx)
        assert abs(mass - ctx.mp.mpf(0.5)) < _tiny(ctx, 15)

    def test_traced_mass(self, ctx, geometry):
        mass = cut_mass(geometry, "J2", ctx, realization=CutRealization.TRACED_ARCS)
        assert float(mass) == pytest.approx(0.5, abs=1e-3)

    def test_unknown_cut(self, ctx, geometry):
        with pytest.raises(ValueError, match="J1 or J2"):
            cut_mass(geometry, "I", ctx)


class TestTrajectories:
    """Critical trajectories of -Q dz^2"""

    def test_short_trajectory(self, ctx, geometry):
        assert short_trajectory_closes(1, complex(geometry.b2), geometry, ctx)

    def test_orthogonal_ray_escapes(self, ctx, geometry):
        """Right of b_2 the real axis is an orthogonal trajectory"""
        result = trace_trajectory(complex(geometry.b2), 0.0, geometry, ctx, kind=TrajectoryKind.ORTHOGONAL)
        assert result.termination == Termination.ESCAPE
        assert result.endpoint is None
        assert abs(result.final_angle) < 1e-6


class TestRegions:
    """Heuristic region labels"""

    def test_two_cut_region(self, ctx):
        assert classify_region(-3, ctx) == Region.O2
        assert two_cut_geometry(-3, ctx).region == Region.O2

    def test_one_cut_region(self, ctx):
        assert classify_region(0, ctx) == Region.O1

    @pytest.mark.parametrize("t", [2, -2, "0+3.4641016151377545870548926830117447j",
                                   "0-3.4641016151377545870548926830117447j"])
    def test_boundary_points(self, ctx, t):
        """Endpoint collisions and the triple points"""
        assert classify_region(t, ctx) == Region.BOUNDARY


class TestSignChart:
    """Re eta on a grid"""

    @pytest.fixture(scope="class")
    def chart(self, ctx, geometry):
        return sign_chart(geometry, -3, 3, -2, 2, 7, 5, ctx)

    def test_shape(self, chart):
        assert chart.values.shape == (5, 7)
        assert chart.near_cut.shape == (5, 7)

    def test_even_in_z(self, chart):
        """Re eta(-z) = Re eta(z)"""
        np.testing.assert_allclose(chart.values, chart.values[::-1, ::-1], atol=1e-12)

    def test_cut_flags(self, chart):
        """z = 2 and z = -2 lie on the cuts"""
        assert chart.near_cut[2, 5]
        assert chart.near_cut[2, 1]
        assert not chart.near_cut[0, 0]

    def test_negative_outside(self, chart):
        assert chart.values[2, 6] < 0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
