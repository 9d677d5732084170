"""
Monic orthogonal polynomials P_n(z; t, N) for the quartic weight: construction by the
three-term recurrence, evaluation, orthogonality checks and roots.
"""
import logging
from dataclasses import dataclass

import mpmath
import numpy as np

from core.errors import DegenerateDegree, RootRefinementFail
from core.precision import PrecisionComplex, PrecisionContext
from polys.hankel import OPSequence, monic_coefficients, op_sequence
from polys.moments import ModelPoint, MomentProvenance, moment_table, weighted_integral


@dataclass(frozen=True)
class MonicPolynomial:
    """Coefficients in increasing powers; coeffs[degree] is exactly 1."""
    degree: int
    coeffs: tuple[PrecisionComplex, ...]
    point: ModelPoint

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ValueError(f"degree {self.degree} needs {self.degree + 1} coefficients, got {len(self.coeffs)}")
        leading = self.coeffs[-1]
        if leading.re != 1 or leading.im != 0:
            raise ValueError("leading coefficient must be exactly 1")
        for j in range(self.degree - 1, -1, -2):
            if self.coeffs[j].re != 0 or self.coeffs[j].im != 0:
                raise ValueError(f"coefficient of z^{j} must vanish by parity")

    def values(self, ctx: PrecisionContext) -> list[mpmath.mpc]:
        return [ctx.convert(c) for c in self.coeffs]

    def evaluate(self, z, ctx: PrecisionContext) -> mpmath.mpc:
        z = ctx.convert(z)
        total = ctx.mp.mpc(0)
        for c in reversed(self.values(ctx)):
            total = total * z + c
        return total


def build_pn(point: ModelPoint, n: int, ctx: PrecisionContext, sequence: OPSequence | None = None) -> MonicPolynomial:
    """P_n from P_{k+1} = z P_k - gamma_k^2 P_{k-1}."""
    if n < 0:
        raise ValueError(f"degree must be nonnegative, got {n}")
    mp = ctx.mp
    if n >= 2:
        sequence = sequence or op_sequence(point, n - 1, ctx)
        for k in range(n + 1):
            if not sequence.degree_full[k]:
                raise DegenerateDegree(k)
    previous = [mp.mpc(1)]
    current = [mp.mpc(0), mp.mpc(1)]
    if n == 0:
        current = previous
    for k in range(1, n):
        gamma_sq = ctx.convert(sequence.gamma(k))
        following = [mp.mpc(0)] + current
        for j in range(len(previous)):
            following[j] = following[j] - gamma_sq * previous[j]
        previous, current = current, following
    return MonicPolynomial(degree=n, coeffs=tuple(ctx.wrap(c) for c in current), point=point)


def pn_from_determinant(point: ModelPoint, n: int, ctx: PrecisionContext) -> MonicPolynomial:
    """P_n from the moment determinant representation, independent of the recurrence."""
    table = moment_table(point, max(n, 2), ctx)
    coeffs = monic_coefficients(table.values(ctx), n, ctx)
    return MonicPolynomial(degree=n, coeffs=tuple(ctx.wrap(c) for c in coeffs), point=point)


def gram_schmidt_pn(point: ModelPoint, n: int, ctx: PrecisionContext) -> MonicPolynomial:
    """Gram-Schmidt on 1, z, z^2, ... with the bilinear form of quadrature moments."""
    mp = ctx.mp
    mu = moment_table(point, max(n, 2), ctx, provenance=MomentProvenance.QUADRATURE).values(ctx)

    def pairing(p, q):
        return mp.fsum(p[i] * q[j] * mu[i + j] for i in range(len(p)) for j in range(len(q)) if p[i] and q[j])

    basis = []
    for k in range(n + 1):
        vector = [mp.mpc(0)] * k + [mp.mpc(1)]
        for previous in basis:
            weight = pairing(vector, previous) / pairing(previous, previous)
            for j, c in enumerate(previous):
                vector[j] -= weight * c
        for j in range(k - 1, -1, -2):
            vector[j] = mp.mpc(0)
        basis.append(vector)
    return MonicPolynomial(degree=n, coeffs=tuple(ctx.wrap(c) for c in basis[n]), point=point)


def orthogonality_check(point: ModelPoint, n: int, k: int, ctx: PrecisionContext,
                        poly: MonicPolynomial | None = None) -> tuple[mpmath.mpc, mpmath.mpf]:
    """The integral of z^k P_n against the weight, with the integral of its modulus as scale."""
    if k > n or k < 0:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if (n + k) % 2:
        return ctx.mp.mpc(0), ctx.mp.mpf(0)
    poly = poly or build_pn(point, n, ctx)
    value, mass = weighted_integral(lambda s: s**k * poly.evaluate(s, ctx), point, ctx,
                                    degree_hint=n + k, with_mass=True)
    return value, mass


def orthogonality_residual(point: ModelPoint, n: int, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    value, _ = orthogonality_check(point, n, k, ctx)
    return ctx.wrap(value)


def _aberth(mp, coeffs_desc, roots, tol, max_iter: int = 200):
    derivative = [c * (len(coeffs_desc) - 1 - i) for i, c in enumerate(coeffs_desc[:-1])]
    for _ in range(max_iter):
        largest = mp.mpf(0)
        for i, r in enumerate(roots):
            p = mp.polyval(coeffs_desc, r)
            if p == 0:
                continue
            ratio = p / mp.polyval(derivative, r)
            repulsion = mp.fsum(1 / (r - roots[j]) for j in range(len(roots)) if j != i)
            step = ratio / (1 - ratio * repulsion)
            roots[i] = r - step
            largest = max(largest, abs(step) / max(1, abs(r)))
        if largest < tol:
            return roots
    raise RootRefinementFail(f"Aberth iteration did not settle within {max_iter} sweeps")


def pn_zeros(poly: MonicPolynomial, ctx: PrecisionContext) -> list[PrecisionComplex]:
    """
    Roots of P_n. Writing P_n(z) = z^(n mod 2) Q(z^2), the roots of Q start from numpy
    companion eigenvalues and are refined by Aberth sweeps at full precision, so the
    zeros come in exact ± pairs.
    """
    if poly.degree < 1:
        raise ValueError("pn_zeros needs degree >= 1")
    mp = ctx.mp
    coeffs = poly.values(ctx)
    parity = poly.degree % 2
    reduced = coeffs[parity::2]
    zeros = [mp.mpc(0)] if parity else []
    if len(reduced) > 1:
        coeffs_desc = list(reversed(reduced))
        guesses = np.roots(np.array([complex(c) for c in coeffs_desc], dtype=np.complex128))
        if not np.all(np.isfinite(guesses)) or len(guesses) != len(coeffs_desc) - 1:
            logging.warning("Companion eigenvalues were not finite; starting Aberth from a circle")
            radius = float(abs(reduced[0])) ** (1.0 / (len(reduced) - 1)) or 1.0
            count = len(coeffs_desc) - 1
            guesses = radius * np.exp(2j * np.pi * (np.arange(count) + 0.25) / count)
        roots = _aberth(mp, coeffs_desc, [mp.mpc(complex(g)) for g in guesses], ctx.zero_tol)
        for w in roots:
            root = mp.sqrt(w)
            zeros.extend([root, -root])
    return [ctx.wrap(z) for z in zeros]
