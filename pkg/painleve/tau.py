"""
Tau functions of the tower as Wronskian-Hankel determinants of the seed functions
phi(x) = e^{x^2/2} D_nu(sqrt(2) x), with nu = -1/2 for m = 0 and nu = -3/2 for m = -1.
"""
import logging
from dataclasses import dataclass

import mpmath

from core.precision import PrecisionComplex, PrecisionContext, pcf_derivative_sequence

SEED_NU = {0: -0.5, -1: -1.5}
SEED_ALPHA1 = {0: 0.5, -1: 1.5}


@dataclass(frozen=True)
class TauFamily:
    """tau~_{n,0,0}(x) and tau~_{n,-1,0}(x) for n = -1..n_max, stored from index -1."""
    x: PrecisionComplex
    tau_e: tuple[PrecisionComplex, ...]
    tau_o: tuple[PrecisionComplex, ...]
    prec_bits: int

    @property
    def n_max(self) -> int:
        return len(self.tau_e) - 2

    def tilde(self, n: int, m: int) -> PrecisionComplex:
        if n < -1 or n > self.n_max:
            raise IndexError(f"tau index {n} is outside -1..{self.n_max}")
        values = self.tau_e if m == 0 else self.tau_o
        return values[n + 1]


def _check_family(m: int):
    if m not in SEED_NU:
        raise ValueError(f"only the m = 0 and m = -1 families are available, got {m}")


def _tilde_dets(x, n_max: int, m: int, ctx: PrecisionContext) -> list[mpmath.mpc]:
    mp = ctx.mp
    root2 = mp.sqrt(2)
    entries = pcf_derivative_sequence(ctx, mp.mpf(SEED_NU[m]), root2 * ctx.convert(x), root2, 2 * n_max + 1)
    dets = [mp.mpc(1)]
    for n in range(n_max + 1):
        size = n + 1
        dets.append(mp.det(mp.matrix([[entries[i + j] for j in range(size)] for i in range(size)])))
    return dets


def tau_tilde(n: int, m: int, x, ctx: PrecisionContext) -> mpmath.mpc:
    """det[d^{i+j}/dx^{i+j} phi(x)]_{i,j=0..n}; tau~_{-1} = 1."""
    _check_family(m)
    if n < -1:
        raise ValueError(f"tau index must be at least -1, got {n}")
    if n == -1:
        return ctx.mp.mpc(1)
    return _tilde_dets(x, n, m, ctx)[-1]


def tau_value(n: int, m: int, x, ctx: PrecisionContext) -> mpmath.mpc:
    """tau_{n,m,0}(x) = e^{-(alpha_1 + n) x^2} tau~_{n,m,0}(x) with alpha_1 of the seed."""
    x = ctx.convert(x)
    return ctx.mp.exp(-(ctx.mp.mpf(SEED_ALPHA1[m]) + n) * x * x) * tau_tilde(n, m, x, ctx)


def tau_families(x, n_max: int, ctx: PrecisionContext) -> TauFamily:
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    even = _tilde_dets(x, n_max, 0, ctx)
    odd = _tilde_dets(x, n_max, -1, ctx)
    logging.info(f"Computed tau families to n={n_max} at x={mpmath.nstr(ctx.convert(x), 10)}")
    return TauFamily(
        x=ctx.wrap(x),
        tau_e=tuple(ctx.wrap(v) for v in even),
        tau_o=tuple(ctx.wrap(v) for v in odd),
        prec_bits=ctx.prec_bits,
    )


def toda_residual(n: int, m: int, x, ctx: PrecisionContext) -> mpmath.mpf:
    """
    Relative residual of (log tau~_n)'' = tau~_{n+1} tau~_{n-1} / tau~_n^2, written
    without division as tau~_n tau~_n'' - tau~_n'^2 - tau~_{n+1} tau~_{n-1}.
    """
    _check_family(m)
    if n < 0:
        raise ValueError(f"Toda check needs n >= 0, got {n}")
    mp = ctx.mp
    x = ctx.convert(x)
    tau, d1, d2 = mp.diffs(lambda y: tau_tilde(n, m, y, ctx), x, 2)
    above = tau_tilde(n + 1, m, x, ctx)
    below = tau_tilde(n - 1, m, x, ctx)
    lhs = tau * d2 - d1 * d1
    rhs = above * below
    scale = max(abs(tau * d2), abs(d1 * d1), abs(rhs))
    return abs(lhs - rhs) / scale if scale else mp.mpf(0)
