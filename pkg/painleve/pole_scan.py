"""
Zeros of the Hankel factors H^(e)_n(t, N), H^(o)_n(t, N) in a rectangle of the t-plane.

With x = t sqrt(N)/2 the factors are tau~_{n-1,0,0}(x) and tau~_{n-1,-1,0}(x) up to a
nonzero constant, so the zeros of H^(e)_{n+1} H^(o)_n are the poles of (f_1)_{n,0,0}.
Candidate cells come from the winding number of the sampled values around each cell
and are refined by secant iteration.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import mpmath
import numpy as np

from core.errors import RefinementFail
from core.precision import PrecisionComplex, PrecisionContext
from painleve.tau import tau_tilde


class HankelFactor(str, Enum):
    EVEN = "e"
    ODD = "o"


FACTOR_FAMILY = {HankelFactor.EVEN: 0, HankelFactor.ODD: -1}


@dataclass(frozen=True)
class Window:
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("a scan window needs at least 2 nodes per direction")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"empty window [{self.x0}, {self.x1}] x [{self.y0}, {self.y1}]")

    @property
    def cells(self) -> int:
        return (self.nx - 1) * (self.ny - 1)


@dataclass(frozen=True)
class ScanZero:
    t: PrecisionComplex
    x: PrecisionComplex
    factor: HankelFactor
    n: int
    neighbour_ratio: float


@dataclass
class PoleScanResult:
    n: int
    N: float
    window: Window
    zeros: list[ScanZero] = field(default_factory=list)
    unresolved: list[tuple[int, int]] = field(default_factory=list)

    def count(self, factor: HankelFactor | None = None) -> int:
        return sum(1 for z in self.zeros if factor is None or z.factor == factor)


def hankel_factor_function(n: int, factor: HankelFactor, N, ctx: PrecisionContext):
    """t -> tau~_{n-1}(t sqrt(N)/2) of the chosen family, which vanishes with H^(e/o)_n(t, N)."""
    mp = ctx.mp
    family = FACTOR_FAMILY[HankelFactor(factor)]
    half_root = mp.sqrt(mp.mpf(N)) / 2

    def evaluate(t):
        return tau_tilde(n - 1, family, half_root * ctx.convert(t), ctx)

    return evaluate


def _cell_windings(values: np.ndarray) -> np.ndarray:
    """Winding number of the sampled function around each grid cell, from corner phases."""
    phase = np.angle(values)

    def wrapped(a, b):
        return np.angle(np.exp(1j * (b - a)))

    bottom = wrapped(phase[:-1, :-1], phase[:-1, 1:])
    right = wrapped(phase[:-1, 1:], phase[1:, 1:])
    top = wrapped(phase[1:, 1:], phase[1:, :-1])
    left = wrapped(phase[1:, :-1], phase[:-1, :-1])
    return np.rint((bottom + right + top + left) / (2 * np.pi)).astype(int)


def pole_scan(n: int, window: Window, N, ctx: PrecisionContext,
              factors: tuple[HankelFactor, ...] = (HankelFactor.EVEN, HankelFactor.ODD)) -> PoleScanResult:
    if n < 1:
        raise ValueError(f"pole scans need n >= 1, got {n}")
    mp = ctx.mp
    xs = np.linspace(window.x0, window.x1, window.nx)
    ys = np.linspace(window.y0, window.y1, window.ny)
    dx = (window.x1 - window.x0) / (window.nx - 1)
    dy = (window.y1 - window.y0) / (window.ny - 1)
    tolerance = 0.25 * min(dx, dy)
    result = PoleScanResult(n=n, N=float(N), window=window)
    half_root = mp.sqrt(mp.mpf(N)) / 2

    for factor in factors:
        factor = HankelFactor(factor)
        fun = hankel_factor_function(n, factor, N, ctx)
        values = np.empty((window.ny, window.nx), dtype=np.complex128)
        for row, y in enumerate(ys):
            for col, x in enumerate(xs):
                value = fun(mp.mpc(x, y))
                size = abs(value)
                # unit phasor only; the modulus may overflow a double
                values[row, col] = complex(value / size) if size else 0j
        windings = _cell_windings(values)
        found: list[complex] = []
        for row, col in zip(*np.nonzero(windings)):
            start = mp.mpc(xs[col] + dx / 2, ys[row] + dy / 2)
            try:
                root = refine_zero(fun, start, ctx, step=mp.mpc(dx / 4, dy / 4))
            except RefinementFail as e:
                logging.warning(f"Secant refinement failed in cell ({row}, {col}) for H^({factor.value})_{n}: {e}")
                result.unresolved.append((int(row), int(col)))
                continue
            approx = complex(root)
            inside = (xs[col] - dx <= approx.real <= xs[col] + 2 * dx
                      and ys[row] - dy <= approx.imag <= ys[row] + 2 * dy)
            if not inside:
                logging.warning(f"Secant iterate left cell ({row}, {col}) for H^({factor.value})_{n}; marking unresolved")
                result.unresolved.append((int(row), int(col)))
                continue
            if any(abs(approx - other) < tolerance for other in found):
                continue
            found.append(approx)
            result.zeros.append(ScanZero(
                t=ctx.wrap(root),
                x=ctx.wrap(half_root * root),
                factor=factor,
                n=n,
                neighbour_ratio=_neighbour_ratio(n, factor, half_root * root, ctx),
            ))
        logging.info(f"Found {len(found)} zeros of H^({factor.value})_{n} in {window.cells} cells")
    return result


def _neighbour_ratio(n: int, factor: HankelFactor, x, ctx: PrecisionContext) -> float:
    """
    |tau~_n tau~_{n-2}| / |tau~_{n-1}'|^2 at a zero of tau~_{n-1}. The Toda relation makes this 1,
    so neither neighbour can vanish there.
    """
    mp = ctx.mp
    family = FACTOR_FAMILY[factor]
    product = tau_tilde(n, family, x, ctx) * tau_tilde(n - 2, family, x, ctx)
    slope = mp.diff(lambda y: tau_tilde(n - 1, family, y, ctx), x)
    return float(abs(product) / abs(slope) ** 2) if slope else float("inf")


def refine_zero(fun, guess, ctx: PrecisionContext, step=None) -> mpmath.mpc:
    """
    Secant refinement started from guess and guess + step, on fun normalised by its size at
    the guess. Raises RefinementFail when the iteration does not settle.
    """
    mp = ctx.mp
    guess = ctx.convert(guess)
    step = ctx.convert(step) if step is not None else mp.mpf(2) ** -10 * max(1, abs(guess))
    size = abs(fun(guess)) or mp.mpf(1)
    try:
        return mp.findroot(lambda t: fun(t) / size, (guess, guess + step), solver="secant")
    except (ValueError, ZeroDivisionError) as e:
        raise RefinementFail(f"secant iteration from {mp.nstr(guess, 10)} did not converge: {e}") from e
