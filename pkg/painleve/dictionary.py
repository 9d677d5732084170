"""
The tower read through the orthogonal polynomials at (2x, 1):

    (f_0)_{n,0,0} = -gamma_{2n}^2,  (f_1)_{n,0,0} = -gamma_{2n+1}^2,  (f_2)_{n,0,0} = 2x + gamma_{2n}^2 + gamma_{2n+1}^2,
    sigma_{n,0,0} = 𝔭_{2n+2,2n} - (2n+1) x,   sigma_{n,-1,0} = 𝔭_{2n+3,2n+1} - (2n+3) x.
"""
from dataclasses import dataclass

import mpmath

from core.precision import PrecisionContext
from painleve.symmetric import sigma_from_triple, tower
from polys.hankel import OPSequence, op_sequence
from polys.moments import ModelPoint


@dataclass(frozen=True)
class DictionaryCheck:
    """Relative residuals of the three components and the two sigma identities at (n, x)."""
    n: int
    f: tuple[mpmath.mpf, mpmath.mpf, mpmath.mpf]
    sigma_even: mpmath.mpf
    sigma_odd: mpmath.mpf

    @property
    def worst(self) -> mpmath.mpf:
        return max(max(self.f), self.sigma_even, self.sigma_odd)


def _relative(mp, a, b):
    scale = max(abs(a), abs(b), mp.mpf(1))
    return abs(a - b) / scale


def sequence_at(x, n: int, ctx: PrecisionContext) -> OPSequence:
    """Recurrence data at t = 2x, N = 1 reaching 𝔭_{2n+3, 2n+1}."""
    x = ctx.convert(x)
    return op_sequence(ModelPoint(t=ctx.wrap(2 * x), N=1), 2 * n + 2, ctx)


def dictionary_triple(n: int, x, ctx: PrecisionContext, sequence: OPSequence | None = None):
    x = ctx.convert(x)
    sequence = sequence or sequence_at(x, n, ctx)
    even = ctx.convert(sequence.gamma(2 * n))
    odd = ctx.convert(sequence.gamma(2 * n + 1))
    return -even, -odd, 2 * x + even + odd


def dictionary_sigma(n: int, m: int, x, ctx: PrecisionContext, sequence: OPSequence | None = None) -> mpmath.mpc:
    x = ctx.convert(x)
    sequence = sequence or sequence_at(x, n, ctx)
    if m == 0:
        return ctx.convert(sequence.p2(2 * n + 2)) - (2 * n + 1) * x
    if m == -1:
        return ctx.convert(sequence.p2(2 * n + 3)) - (2 * n + 3) * x
    raise ValueError(f"only the m = 0 and m = -1 families are available, got {m}")


def dictionary_check(n: int, x, ctx: PrecisionContext) -> DictionaryCheck:
    mp = ctx.mp
    x = ctx.convert(x)
    sequence = sequence_at(x, n, ctx)
    triple = tower(n, 0, x, ctx)
    predicted = dictionary_triple(n, x, ctx, sequence)
    f = tuple(_relative(mp, value, expected) for value, expected in zip(triple.values(), predicted))
    sigma_even = _relative(mp, ctx.convert(sigma_from_triple(triple)), dictionary_sigma(n, 0, x, ctx, sequence))
    sigma_odd = _relative(
        mp,
        ctx.convert(sigma_from_triple(tower(n, -1, x, ctx))),
        dictionary_sigma(n, -1, x, ctx, sequence),
    )
    return DictionaryCheck(n=n, f=f, sigma_even=sigma_even, sigma_odd=sigma_odd)
