"""
Hankel determinants of the moment sequence, their even/odd factorization, norming
constants, recurrence coefficients and the sub-leading polynomial coefficients.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath

from core.errors import DegenerateDegree, Inconclusive, PrecisionLoss
from core.precision import PrecisionComplex, PrecisionContext, pcf_derivative_sequence
from polys.moments import ModelPoint, MomentTable, moment_table


@dataclass(frozen=True)
class HankelFamily:
    """
    H_0..H_m with H_{-1} = 1 implicit, the factors H^(e)_k, H^(o)_k for k = 0..K (the
    empty determinant being 1), log|H_k| and the zero flags of the minors.
    """
    point: ModelPoint
    H: tuple[PrecisionComplex, ...]
    He: tuple[PrecisionComplex, ...]
    Ho: tuple[PrecisionComplex, ...]
    scale_log: tuple[mpmath.mpf, ...]
    zero_flags: tuple[bool, ...]
    pivots: tuple[PrecisionComplex | None, ...]
    moments: MomentTable
    prec_bits: int

    @property
    def m(self) -> int:
        return len(self.H) - 1

    def minor(self, k: int) -> PrecisionComplex:
        if k == -1:
            return PrecisionComplex.from_value(1, self.prec_bits)
        return self.H[k]

    def vanishes(self, k: int) -> bool:
        if k == -1:
            return False
        return self.zero_flags[k]


def _eliminate(ctx: PrecisionContext, mu, majorant, size: int, stop_below):
    """
    Gaussian elimination without pivoting on [mu_{i+j}]. The pivots are the norming
    constants h_k. Each pivot is compared against the largest quantity that entered it;
    elimination stops at the first pivot whose ratio falls below stop_below.
    """
    mp = ctx.mp
    a = [[mu[i + j] for j in range(size)] for i in range(size)]
    growth = [mp.mpf(0)] * size
    pivots = []
    for k in range(size):
        pivot = a[k][k]
        scale = max(abs(pivot), growth[k], majorant[2 * k])
        pivots.append((pivot, scale))
        if scale == 0 or abs(pivot) < stop_below * scale:
            return pivots, k
        for i in range(k + 2, size, 2):
            factor = a[i][k] / pivot
            for j in range(k + 2, size, 2):
                update = factor * a[k][j]
                a[i][j] -= update
                if i == j:
                    growth[i] = max(growth[i], abs(update))
    return pivots, None


def _hadamard_bound(mp, majorant, size: int):
    bound = mp.mpf(1)
    for i in range(size):
        bound *= mp.sqrt(mp.fsum(majorant[i + j] ** 2 for j in range(size)))
    return bound


def _factor_dets(ctx: PrecisionContext, point: ModelPoint, count: int):
    """H^(e)_k and H^(o)_k for k = 0..count from derivatives of e^{Nt^2/8} D_nu(t sqrt(N/2))."""
    mp = ctx.mp
    t = point.t_value(ctx)
    N = point.N_value(ctx)
    scale = mp.sqrt(N / 2)
    s = scale * t
    results = []
    for nu in (-mp.mpf(0.5), -mp.mpf(1.5)):
        entries = pcf_derivative_sequence(ctx, nu, s, scale, max(2 * count - 1, 1))
        dets = [mp.mpc(1)]
        for k in range(1, count + 1):
            dets.append(mp.det(mp.matrix([[entries[i + j] for j in range(k)] for i in range(k)])))
        results.append(dets)
    return results


def factorization_prefactor(ctx: PrecisionContext, k: int, N):
    """Constant c_k with H_k = c_k H^(e) H^(o) (indices as in factorized_minor)."""
    mp = ctx.mp
    N = mp.mpf(N)
    if k % 2:
        n = (k + 1) // 2
        return mp.pi ** n * mp.power(2, 2 * n * (n - 1)) / mp.power(N, n * (2 * n - 1))
    n = k // 2
    return (mp.power(mp.pi, n + mp.mpf(0.5)) * mp.power(2, 2 * n * n + mp.mpf(0.25))
            / mp.power(N, 2 * n * n + n + mp.mpf(0.25)))


def factorized_minor(family: HankelFamily, k: int, ctx: PrecisionContext) -> mpmath.mpc:
    """H_{2n-1} = c H^(e)_n H^(o)_n and H_{2n} = c H^(e)_{n+1} H^(o)_n."""
    He = [ctx.convert(v) for v in family.He]
    Ho = [ctx.convert(v) for v in family.Ho]
    if k % 2:
        n = (k + 1) // 2
        product = He[n] * Ho[n]
    else:
        n = k // 2
        product = He[n + 1] * Ho[n]
    return factorization_prefactor(ctx, k, family.point.N_value(ctx)) * product


def factorization_residuals(family: HankelFamily, ctx: PrecisionContext) -> list[mpmath.mpf]:
    residuals = []
    for k in range(family.m + 1):
        direct = ctx.convert(family.H[k])
        factored = factorized_minor(family, k, ctx)
        scale = max(abs(direct), abs(factored))
        residuals.append(abs(direct - factored) / scale if scale else ctx.mp.mpf(0))
    return residuals


def hankel_dets(point: ModelPoint, m: int, ctx: PrecisionContext, allow_rerun: bool = True) -> HankelFamily:
    """
    H_0..H_m of the moment matrix at `point`.

    A pivot whose size relative to its entries falls into the ambiguous band below
    2^(-p/4) triggers one re-run at doubled precision. At the final precision a pivot
    below 2^(-p/2) of its scale declares H_k = 0, and later minors are computed by
    pivoted determinants with a Hadamard-bound zero test.
    """
    mp = ctx.mp
    table = moment_table(point, max(m, 2), ctx)
    majorant_point = point.with_t(point.t_value(ctx).real)
    majorant = [abs(v) for v in moment_table(majorant_point, max(m, 2), ctx).values(ctx)]
    mu = table.values(ctx)
    size = m + 1

    stop_below = ctx.check_tol if allow_rerun else ctx.zero_tol
    pivots, stop = _eliminate(ctx, mu, majorant, size, stop_below)
    if stop is not None and allow_rerun:
        logging.warning(
            f"Hankel pivot {stop} at t={point.t}, N={point.N} is in the ambiguous band at "
            f"{ctx.prec_bits} bits; re-running at {2 * ctx.prec_bits} bits"
        )
        return hankel_dets(point, m, ctx.doubled(), allow_rerun=False)

    H = []
    flags = []
    pivot_values = []
    error_estimate = mp.mpf(0)
    running = mp.mpc(1)
    accepted = size if stop is None else stop
    for k in range(accepted):
        pivot, scale = pivots[k]
        running *= pivot
        error_estimate += mp.eps * scale / abs(pivot)
        H.append(running)
        flags.append(False)
        pivot_values.append(ctx.wrap(pivot))
    for k in range(accepted, size):
        block = mp.matrix([[mu[i + j] for j in range(k + 1)] for i in range(k + 1)])
        value = mp.det(block)
        bound = _hadamard_bound(mp, majorant, k + 1)
        vanishes = abs(value) < ctx.zero_tol * bound
        if not vanishes:
            error_estimate = max(error_estimate, mp.eps * bound / abs(value))
        H.append(value)
        flags.append(vanishes)
        pivot_values.append(None)
    if stop is not None:
        logging.warning(f"H_{stop} vanishes at t={point.t}, N={point.N} ({ctx.prec_bits} bits)")
    if error_estimate > ctx.check_tol:
        raise PrecisionLoss(
            f"estimated relative error {mp.nstr(error_estimate, 5)} in H_0..H_{m} exceeds "
            f"2^-{ctx.prec_bits // 4}; raise prec_bits"
        )

    He, Ho = _factor_dets(ctx, point, m // 2 + 1)
    return HankelFamily(
        point=point,
        H=tuple(ctx.wrap(v) for v in H),
        He=tuple(ctx.wrap(v) for v in He),
        Ho=tuple(ctx.wrap(v) for v in Ho),
        scale_log=tuple(mp.log(abs(v)) if v != 0 else mp.ninf for v in H),
        zero_flags=tuple(flags),
        pivots=tuple(pivot_values),
        moments=table,
        prec_bits=ctx.prec_bits,
    )


def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    """Fraction-free (Bareiss) determinant of an exact rational matrix."""
    a = [list(row) for row in rows]
    n = len(a)
    if n == 0:
        return Fraction(1)
    sign = 1
    previous = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / previous
        previous = a[k][k]
    return sign * a[n - 1][n - 1]


def checkerboard_identity_check(c, n: int, ctx: PrecisionContext | None = None) -> bool:
    """
    Verify det[c'_{i+j}] = det[c_{i+j}] det[c_{i+j+1}] for the checkerboard sequence
    c'_{2k} = c_k, c'_{2k+1} = 0, in both shapes:
        size 2n:   det[c_{i+j}]_{n} det[c_{i+j+1}]_{n}
        size 2n+1: det[c_{i+j}]_{n+1} det[c_{i+j+1}]_{n}
    Integer and Fraction sequences are checked exactly, anything else to ctx.check_tol.
    """
    if len(c) < 2 * n + 1:
        raise ValueError(f"need c_0..c_{2 * n}, got {len(c)} entries")
    exact = all(isinstance(v, (int, Fraction)) for v in c)

    def checker(size):
        return [[c[(i + j) // 2] if (i + j) % 2 == 0 else 0 for j in range(size)] for i in range(size)]

    def hankel(size, shift):
        return [[c[i + j + shift] for j in range(size)] for i in range(size)]

    shapes = [
        (checker(2 * n), [hankel(n, 0), hankel(n, 1)]),
        (checker(2 * n + 1), [hankel(n + 1, 0), hankel(n, 1)]),
    ]
    if exact:
        for full, factors in shapes:
            lhs = _exact_det([[Fraction(v) for v in row] for row in full])
            rhs = Fraction(1)
            for factor in factors:
                rhs *= _exact_det([[Fraction(v) for v in row] for row in factor])
            if lhs != rhs:
                return False
        return True

    ctx = ctx or PrecisionContext()
    mp = ctx.mp

    def det(rows):
        return mp.det(mp.matrix([[ctx.convert(v) for v in row] for row in rows])) if rows else mp.mpc(1)

    for full, factors in shapes:
        lhs = det(full)
        rhs = mp.mpc(1)
        for factor in factors:
            rhs *= det(factor)
        scale = max(abs(lhs), abs(rhs), mp.mpf(1) * mp.eps)
        if abs(lhs - rhs) > ctx.check_tol * scale:
            return False
    return True


def monic_coefficients(mu: list, n: int, ctx: PrecisionContext) -> list:
    """
    Coefficients c_0..c_n (c_n = 1) of the monic P_n with moments mu, by Cramer's rule
    on the parity-reduced orthogonality system sum_j mu_{i+j} c_j = -mu_{i+n}, where
    i, j run over the indices below n with the parity of n.
    """
    mp = ctx.mp
    coeffs = [mp.mpc(0)] * n + [mp.mpc(1)]
    idx = [j for j in range(n) if (n - j) % 2 == 0]
    if not idx:
        return coeffs
    A = mp.matrix([[mu[i + j] for j in idx] for i in idx])
    b = mp.matrix([-mu[i + n] for i in idx])
    solution = mp.lu_solve(A, b)
    for position, j in enumerate(idx):
        coeffs[j] = solution[position]
    return coeffs


@dataclass(frozen=True)
class OPSequence:
    """
    Norming constants h_0..h_m, gamma_sq[0..m] (gamma_0^2 = 0), the sub-leading
    coefficients p_sub2[n] = 𝔭_{n,n-2} and p_sub4[n] = 𝔭_{n,n-4} for n = 0..m+1, and
    degree_full[n] (H_{n-1} != 0) for n = 0..m+1. Missing entries are None; h[n] is 0
    where H_n vanishes.
    """
    point: ModelPoint
    h: tuple[PrecisionComplex | None, ...]
    gamma_sq: tuple[PrecisionComplex | None, ...]
    p_sub2: tuple[PrecisionComplex | None, ...]
    p_sub4: tuple[PrecisionComplex | None, ...]
    degree_full: tuple[bool, ...]
    prec_bits: int

    @property
    def m(self) -> int:
        return len(self.h) - 1

    def _require(self, values, n: int, name: str) -> PrecisionComplex:
        if n < 0 or n >= len(values):
            raise IndexError(f"{name}[{n}] is outside the computed range")
        value = values[n]
        if value is None:
            raise DegenerateDegree(n, f"{name}[{n}] is undefined because a Hankel minor vanishes")
        return value

    def gamma(self, n: int) -> PrecisionComplex:
        return self._require(self.gamma_sq, n, "gamma_sq")

    def norm(self, n: int) -> PrecisionComplex:
        return self._require(self.h, n, "h")

    def p2(self, n: int) -> PrecisionComplex:
        return self._require(self.p_sub2, n, "p_sub2")

    def p4(self, n: int) -> PrecisionComplex:
        return self._require(self.p_sub4, n, "p_sub4")


def op_sequence(point: ModelPoint, m: int, ctx: PrecisionContext) -> OPSequence:
    family = hankel_dets(point, m + 1, ctx)
    work = ctx if family.prec_bits == ctx.prec_bits else ctx.with_prec(family.prec_bits)
    mp = work.mp
    mu = family.moments.values(work)

    h = []
    for n in range(m + 1):
        if family.vanishes(n - 1):
            h.append(None)
        elif family.vanishes(n):
            h.append(mp.mpc(0))
        elif family.pivots[n] is not None:
            h.append(work.convert(family.pivots[n]))
        else:
            h.append(work.convert(family.minor(n)) / work.convert(family.minor(n - 1)))
    gamma_sq = [mp.mpc(0)]
    for n in range(1, m + 1):
        defined = h[n] is not None and h[n - 1] is not None and h[n - 1] != 0
        gamma_sq.append(h[n] / h[n - 1] if defined else None)

    degree_full = [not family.vanishes(n - 1) for n in range(m + 2)]
    p_sub2, p_sub4 = [], []
    for n in range(m + 2):
        if not degree_full[n]:
            logging.warning(f"P_{n} is not of full degree at t={point.t}, N={point.N}; marking it missing")
            p_sub2.append(None)
            p_sub4.append(None)
            continue
        coeffs = monic_coefficients(mu, n, work)
        p_sub2.append(coeffs[n - 2] if n >= 2 else mp.mpc(0))
        p_sub4.append(coeffs[n - 4] if n >= 4 else mp.mpc(0))

    def wrap_all(values):
        return tuple(None if v is None else work.wrap(v) for v in values)

    return OPSequence(
        point=point,
        h=wrap_all(h),
        gamma_sq=wrap_all(gamma_sq),
        p_sub2=wrap_all(p_sub2),
        p_sub4=wrap_all(p_sub4),
        degree_full=tuple(degree_full),
        prec_bits=work.prec_bits,
    )


def string_equation_residual(sequence: OPSequence, n: int, ctx: PrecisionContext) -> mpmath.mpc:
    """gamma_n^2 (t + gamma_{n-1}^2 + gamma_n^2 + gamma_{n+1}^2) - n/N."""
    t = sequence.point.t_value(ctx)
    N = sequence.point.N_value(ctx)
    previous = ctx.convert(sequence.gamma(n - 1)) if n >= 1 else ctx.mp.mpc(0)
    current = ctx.convert(sequence.gamma(n))
    following = ctx.convert(sequence.gamma(n + 1))
    return current * (t + previous + current + following) - n / N


def p_sub_identities(sequence: OPSequence, n: int, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpc]:
    """
    Residuals of 𝔭_{n,n-2} = -sum_{j<n} gamma_j^2 and
    𝔭_{n+1,n-3} = 𝔭_{n,n-4} - gamma_n^2 𝔭_{n-1,n-3}.
    """
    mp = ctx.mp
    first = ctx.convert(sequence.p2(n)) + mp.fsum(ctx.convert(sequence.gamma(j)) for j in range(n))
    second = (ctx.convert(sequence.p4(n + 1)) - ctx.convert(sequence.p4(n))
              + ctx.convert(sequence.gamma(n)) * ctx.convert(sequence.p2(n - 1)))
    return first, second


class DegreePattern(str, Enum):
    FULL = "full"
    PATTERN_I = "pattern_i"
    PATTERN_II = "pattern_ii"


def degeneration_classify(point: ModelPoint, n: int, ctx: PrecisionContext) -> DegreePattern:
    """
    deg P_k = k exactly when H_{k-1} != 0. A defective P_n comes in one of two shapes:
    pattern_i when H_{n-2} = 0 and H_n != 0, pattern_ii when H_n = 0 and H_{n-2} != 0.
    """
    if n == 0:
        return DegreePattern.FULL
    family = hankel_dets(point, max(n, 2), ctx)
    if not family.vanishes(n - 1):
        if n >= 2 and family.vanishes(n - 2) and family.vanishes(n):
            raise Inconclusive(f"H_{n - 2} and H_{n} both vanish next to a nonzero H_{n - 1}")
        return DegreePattern.FULL
    before = family.vanishes(n - 2)
    after = family.vanishes(n)
    if before and not after:
        return DegreePattern.PATTERN_I
    if after and not before:
        return DegreePattern.PATTERN_II
    raise Inconclusive(
        f"H_{n - 1} vanishes but the neighbouring minors H_{n - 2}, H_{n} do not separate the pattern"
    )
