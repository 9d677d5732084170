"""
Tests for the pole scan of the Hankel factors and the degenerate degrees at their zeros
"""
import numpy as np
import pytest

from core.errors import DegenerateDegree
from painleve.pole_scan import (
    HankelFactor,
    Window,
    _cell_windings,
    hankel_factor_function,
    pole_scan,
    refine_zero,
)
from polys.hankel import DegreePattern, degeneration_classify, op_sequence
from polys.moments import ModelPoint, moment_table
from polys.orthopoly import build_pn


@pytest.fixture(scope="module")
def mu0_scan(ctx):
    """Zeros of H^(e)_1 = mu_0 at N = 1"""
    return pole_scan(1, Window(-6, 6, -6, 6, 25, 25), 1, ctx, factors=(HankelFactor.EVEN,))


@pytest.fixture(scope="module")
def degenerate_point(ctx256, mu0_scan):
    """The zero of mu_0 near t = -2.96 + 3.18i, refined at 256 bits"""
    zero = min(mu0_scan.zeros, key=lambda z: abs(complex(z.t) - (-2.96 + 3.18j)))
    root = refine_zero(hankel_factor_function(1, HankelFactor.EVEN, 1, ctx256), zero.t, ctx256)
    return ModelPoint(t=ctx256.wrap(root), N=1)


class TestScan:
    """Zeros found in the window"""

    def test_finds_the_mu0_zeros(self, mu0_scan):
        assert mu0_scan.count(HankelFactor.EVEN) >= 2
        assert mu0_scan.count(HankelFactor.ODD) == 0
        nearest = min(abs(complex(z.t) - (-2.96 + 3.18j)) for z in mu0_scan.zeros)
        assert nearest < 0.05

    def test_conjugate_pair(self, mu0_scan):
        """The factors are real on the real axis, so the zero below the axis is found too"""
        zeros = [complex(z.t) for z in mu0_scan.zeros]
        upper = min(zeros, key=lambda z: abs(z - (-2.96 + 3.18j)))
        assert min(abs(upper.conjugate() - other) for other in zeros) < 1e-10

    def test_zeros_are_zeros(self, ctx, mu0_scan):
        """mu_0 itself is small at the refined points"""
        for zero in mu0_scan.zeros:
            table = moment_table(ModelPoint(t=zero.t, N=1), 2, ctx)
            assert abs(table.values(ctx)[0]) < ctx.mp.mpf(10) ** -15

    def test_neighbour_ratio(self, mu0_scan):
        """Toda forces |tau~_n tau~_{n-2}| = |tau~_{n-1}'|^2 at a zero"""
        for zero in mu0_scan.zeros:
            assert zero.neighbour_ratio == pytest.approx(1, abs=1e-10)

    def test_x_coordinate(self, mu0_scan):
        """x = t sqrt(N) / 2"""
        for zero in mu0_scan.zeros:
            assert abs(complex(zero.x) - complex(zero.t) / 2) < 1e-15


class TestDegeneration:
    """Defective degrees at a zero of mu_0"""

    @pytest.mark.parametrize("n,pattern", [
        (1, DegreePattern.PATTERN_II),
        (2, DegreePattern.PATTERN_I),
        (3, DegreePattern.FULL),
    ])
    def test_patterns(self, ctx, degenerate_point, n, pattern):
        assert degeneration_classify(degenerate_point, n, ctx) == pattern

    def test_missing_coefficients(self, ctx, degenerate_point):
        """P_1 is not of full degree, so its sub-leading data is missing"""
        sequence = op_sequence(degenerate_point, 2, ctx)
        with pytest.raises(DegenerateDegree):
            sequence.p2(1)

    def test_norms_at_vanishing_minors(self, ctx, degenerate_point):
        """h_0 = H_0 is exactly 0, while h_1 = H_1/H_0 and gamma_1^2 are undefined"""
        sequence = op_sequence(degenerate_point, 2, ctx)
        assert ctx.convert(sequence.norm(0)) == 0
        with pytest.raises(DegenerateDegree, match="h\\[1\\]"):
            sequence.norm(1)
        with pytest.raises(DegenerateDegree):
            sequence.gamma(1)

    def test_polynomial_refuses(self, ctx, degenerate_point):
        with pytest.raises(DegenerateDegree):
            build_pn(degenerate_point, 2, ctx)


class TestPieces:
    """Windings, secant refinement and window checks"""

    def test_cell_windings(self):
        """A single simple zero winds once around the cell that holds it"""
        grid = np.linspace(-1, 1, 5)
        values = grid[None, :] + 1j * grid[:, None] - (0.25 + 0.25j)
        windings = _cell_windings(values)
        assert windings.shape == (4, 4)
        assert windings[2, 2] == 1
        assert np.count_nonzero(windings) == 1

    def test_refine_zero(self, ctx):
        mp = ctx.mp
        root = refine_zero(lambda t: t ** 2 + 1, mp.mpc("0.1", "0.9"), ctx)
        assert abs(root - mp.mpc(0, 1)) < mp.mpf(10) ** -30

    def test_window_checks(self):
        with pytest.raises(ValueError, match="at least 2 nodes"):
            Window(-1, 1, -1, 1, 1, 5)
        with pytest.raises(ValueError, match="empty window"):
            Window(1, -1, -1, 1, 5, 5)
        assert Window(-1, 1, -1, 1, 5, 3).cells == 8

    def test_degree_must_be_positive(self, ctx):
        with pytest.raises(ValueError, match="n >= 1"):
            pole_scan(0, Window(-1, 1, -1, 1, 3, 3), 1, ctx)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
