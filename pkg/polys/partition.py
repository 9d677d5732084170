"""
Partition function Z_k(t, N) and free energy F_k = k^-2 log Z_k of the quartic model,
written through the tau and sigma functions of the parabolic cylinder tower at
x = N^(1/2) t / 2, together with the Heine form k! H_{k-1} they are checked against.
"""
import mpmath

from core.precision import PrecisionComplex, PrecisionContext
from painleve.symmetric import sigma_from_triple, tower
from painleve.tau import tau_value
from polys.moments import ModelPoint, moment_table


def _check_size(k: int):
    if k < 1:
        raise ValueError(f"partition functions need k >= 1, got {k}")


def _x_of(point: ModelPoint, ctx: PrecisionContext) -> mpmath.mpc:
    return ctx.mp.sqrt(point.N_value(ctx)) * point.t_value(ctx) / 2


def partition_function(point: ModelPoint, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    """
    Z_{2n} = N! pi^n 2^{2n(n-1)} N^{-n(2n-1)} e^{nNt^2/2} tau_{n-1,0,0} tau_{n-1,-1,0}(x), and
    Z_{2n+1} carries the extra factor pi^{1/2} 2^{2n+1/4} N^{-(2n+1/4)} e^{Nt^2/4} with
    tau_{n,0,0} tau_{n-1,-1,0}(x).
    """
    _check_size(k)
    mp = ctx.mp
    t = point.t_value(ctx)
    N = point.N_value(ctx)
    x = _x_of(point, ctx)
    n = k // 2
    value = (mp.gamma(N + 1) * mp.pi**n * mp.power(2, 2 * n * (n - 1)) / mp.power(N, n * (2 * n - 1))
             * mp.exp(n * N * t * t / 2))
    if k % 2 == 0:
        return ctx.wrap(value * tau_value(n - 1, 0, x, ctx) * tau_value(n - 1, -1, x, ctx))
    value *= (mp.sqrt(mp.pi) * mp.power(2, 2 * n + mp.mpf(0.25)) / mp.power(N, 2 * n + mp.mpf(0.25))
              * mp.exp(N * t * t / 4))
    return ctx.wrap(value * tau_value(n, 0, x, ctx) * tau_value(n - 1, -1, x, ctx))


def _moment_det(point: ModelPoint, k: int, ctx: PrecisionContext) -> mpmath.mpc:
    """H_{k-1} = det[mu_{i+j}]_{i,j<k} by pivoted elimination."""
    mp = ctx.mp
    mu = moment_table(point, max(k, 2), ctx).values(ctx)
    return mp.det(mp.matrix([[mu[i + j] for j in range(k)] for i in range(k)]))


def heine_value(point: ModelPoint, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    """k! H_{k-1}(t, N)."""
    _check_size(k)
    return ctx.wrap(ctx.mp.factorial(k) * _moment_det(point, k, ctx))


def free_energy(point: ModelPoint, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    """k^-2 log Z_k on the principal branch."""
    return ctx.wrap(ctx.mp.log(ctx.convert(partition_function(point, k, ctx))) / k**2)


def free_energy_derivative(point: ModelPoint, k: int, ctx: PrecisionContext) -> PrecisionComplex:
    """
    dF_k/dt from sigma functions:
    (2n)^2 F' = nNt + (N^(1/2)/2)(sigma_{n-1,0,0} + sigma_{n-1,-1,0}) and
    (2n+1)^2 F' = (n+1/2)Nt + (N^(1/2)/2)(sigma_{n,0,0} + sigma_{n-1,-1,0}), all at x.
    """
    _check_size(k)
    mp = ctx.mp
    t = point.t_value(ctx)
    N = point.N_value(ctx)
    x = _x_of(point, ctx)
    n = k // 2
    odd_sigma = -x if n == 0 else ctx.convert(sigma_from_triple(tower(n - 1, -1, x, ctx)))
    if k % 2 == 0:
        even_sigma = ctx.convert(sigma_from_triple(tower(n - 1, 0, x, ctx)))
        linear = n * N * t
    else:
        even_sigma = ctx.convert(sigma_from_triple(tower(n, 0, x, ctx)))
        linear = (n + mp.mpf(0.5)) * N * t
    return ctx.wrap((linear + mp.sqrt(N) / 2 * (even_sigma + odd_sigma)) / k**2)


def free_energy_derivative_numeric(point: ModelPoint, k: int, ctx: PrecisionContext) -> mpmath.mpc:
    """k^-2 H_{k-1}'/H_{k-1} by numerical differentiation of the moment determinant in t."""
    _check_size(k)
    mp = ctx.mp
    t0 = point.t_value(ctx)

    def det_at(t):
        return _moment_det(point.with_t(PrecisionComplex.from_value(t, mp.prec)), k, ctx)

    value, slope = mp.diffs(det_at, t0, 1)
    return slope / value / k**2
