"""
Two-cut geometry of the quartic potential V(z) = z^4/4 + t z^2/2.

With a_2 = sqrt(-2 - t), b_2 = sqrt(2 - t) the spectral curve is
Q(z) = z^2 (z^2 - a_2^2)(z^2 - b_2^2)/4 and R(z) = (z^2 + t)^2 - 4. The cuts
J_1 = [-b_2, -a_2], J_2 = [a_2, b_2] and the gap arc I = [-a_2, a_2] are realized as
straight chords; the contour Gamma(-inf, b_2] adds the horizontal ray running left
from -b_2.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from core.errors import OffCutError, OnCutError, StepLimit
from core.precision import PrecisionComplex, PrecisionContext, laurent_coefficient


class Region(str, Enum):
    O1 = "O1"
    O2 = "O2"
    O3 = "O3"
    BOUNDARY = "boundary"
    UNKNOWN = "unknown"


class CutRealization(str, Enum):
    CHORDS = "chords"
    TRACED_ARCS = "traced_arcs"


class BranchKind(str, Enum):
    R_SQRT = "R_sqrt"
    Q_SQRT = "Q_sqrt"
    ETA_E = "eta_e"
    G = "g"
    SZEGO_D = "szego_D"
    SZEGO_D_NORMALIZED = "szego_D_normalized"


@dataclass(frozen=True)
class TwoCutGeometry:
    t: PrecisionComplex
    a2: PrecisionComplex
    b2: PrecisionComplex
    ell_star: PrecisionComplex
    cut_realization: CutRealization = CutRealization.CHORDS
    region: Region = Region.UNKNOWN

    def t_value(self, ctx: PrecisionContext) -> mpmath.mpc:
        return ctx.convert(self.t)

    def endpoints(self, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpc]:
        return ctx.convert(self.a2), ctx.convert(self.b2)

    def branch_points(self, ctx: PrecisionContext) -> list[mpmath.mpc]:
        a2, b2 = self.endpoints(ctx)
        return [-b2, -a2, a2, b2]

    def chords(self, ctx: PrecisionContext) -> dict[str, tuple[mpmath.mpc, mpmath.mpc]]:
        """J_1 oriented -b_2 -> -a_2, the gap I oriented -a_2 -> a_2, J_2 oriented a_2 -> b_2."""
        a2, b2 = self.endpoints(ctx)
        return {"J1": (-b2, -a2), "I": (-a2, a2), "J2": (a2, b2)}

    def scale(self) -> float:
        return max(1.0, abs(complex(self.a2)), abs(complex(self.b2)))


def two_cut_geometry(t, ctx: PrecisionContext, classify: bool = True) -> TwoCutGeometry:
    mp = ctx.mp
    t = ctx.convert(t)
    geometry = TwoCutGeometry(
        t=ctx.wrap(t),
        a2=ctx.wrap(mp.sqrt(-2 - t)),
        b2=ctx.wrap(mp.sqrt(2 - t)),
        ell_star=ctx.wrap(t * t / 4 - mp.mpf(0.5)),
    )
    if classify:
        geometry = TwoCutGeometry(
            t=geometry.t, a2=geometry.a2, b2=geometry.b2, ell_star=geometry.ell_star,
            region=classify_region(t, ctx, geometry=geometry),
        )
    return geometry


def potential(z, t):
    return z**4 / 4 + t * z * z / 2


def _chord_root(mp, z, p, q):
    """(z - p) sqrt((z - q)/(z - p)): analytic off the segment [p, q] and ~ z at infinity."""
    if z == p:
        return mp.mpc(0)
    return (z - p) * mp.sqrt((z - q) / (z - p))


def _chord_root_boundary(mp, x, p, q, left: bool):
    """Boundary value of _chord_root on the open segment from the left (or right) of p -> q."""
    ratio = (x - q) / (x - p)
    root = mp.sqrt(-ratio)
    return (x - p) * (mp.j if left else -mp.j) * root


def segment_distance(mp, z, p, q):
    direction = q - p
    length_sq = abs(direction) ** 2
    if length_sq == 0:
        return abs(z - p)
    s = mp.re((z - p) * mp.conj(direction)) / length_sq
    s = min(max(s, 0), 1)
    return abs(z - (p + s * direction))


def _segment_parameter(mp, x, p, q):
    direction = q - p
    return mp.re((x - p) * mp.conj(direction)) / abs(direction) ** 2


def check_off_cuts(z, geometry: TwoCutGeometry, ctx: PrecisionContext, include_gap: bool = False):
    mp = ctx.mp
    tolerance = ctx.cut_tol * geometry.scale()
    for name, (p, q) in geometry.chords(ctx).items():
        if name == "I" and not include_gap:
            continue
        if segment_distance(mp, z, p, q) <= tolerance:
            raise OnCutError(f"z={mp.nstr(z, 12)} lies on the cut {name}")
    if include_gap:
        a2, b2 = geometry.endpoints(ctx)
        # ray running left from -b_2
        if abs(mp.im(z) - mp.im(-b2)) <= tolerance and mp.re(z) <= mp.re(-b2):
            raise OnCutError(f"z={mp.nstr(z, 12)} lies on the ray Gamma(-inf, -b_2]")


def r_sqrt(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """R^(1/2)(z), analytic off the chords J_1, J_2 with R^(1/2)(z) = z^2 + O(1) at infinity."""
    mp = ctx.mp
    z = ctx.convert(z)
    a2, b2 = geometry.endpoints(ctx)
    return _chord_root(mp, z, a2, b2) * _chord_root(mp, z, -a2, -b2)


def q_sqrt(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """Q^(1/2)(z) = z R^(1/2)(z)/2 = V'(z)/2 - 1/z + O(z^-3)."""
    z = ctx.convert(z)
    return z * r_sqrt(z, geometry, ctx) / 2


def q_sqrt_laurent(k: int, geometry: TwoCutGeometry, ctx: PrecisionContext, samples: int = 64) -> mpmath.mpc:
    """Coefficient of z^k in Q^(1/2) at infinity, read off a circle that encloses both cuts."""
    radius = 2 * geometry.scale() + 2
    return laurent_coefficient(lambda z: q_sqrt(z, geometry, ctx), k, radius, samples, ctx)


def r_sqrt_boundary(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> tuple[mpmath.mpc, mpmath.mpc]:
    """(R_+, R_-) at a point of J_1 or J_2; + is the left side of the cut orientation."""
    mp = ctx.mp
    x = ctx.convert(x)
    a2, b2 = geometry.endpoints(ctx)
    name = locate_on_cut(x, geometry, ctx)
    if name == "J2":
        regular = _chord_root(mp, x, -a2, -b2)
        plus = _chord_root_boundary(mp, x, a2, b2, left=True) * regular
    else:
        regular = _chord_root(mp, x, a2, b2)
        plus = _chord_root_boundary(mp, x, -a2, -b2, left=False) * regular
    return plus, -plus


def locate_on_cut(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> str:
    mp = ctx.mp
    tolerance = ctx.check_tol * geometry.scale()
    chords = geometry.chords(ctx)
    for name in ("J1", "J2"):
        p, q = chords[name]
        s = _segment_parameter(mp, x, p, q)
        if segment_distance(mp, x, p, q) <= tolerance and 0 < s < 1:
            return name
    raise OffCutError(f"x={mp.nstr(x, 12)} is not an interior point of J_1 or J_2")


def _escape_directions():
    yield 1j
    yield -1j
    yield 1.0
    yield -1.0
    for k in range(16):
        yield complex(np.exp(2j * np.pi * (k + 0.5) / 16))


def segments_cross(p1: complex, p2: complex, q1: complex, q2: complex) -> bool:
    def orient(a, b, c):
        return (b - a).real * (c - a).imag - (b - a).imag * (c - a).real

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return (d1 * d2 <= 0) and (d3 * d4 <= 0)


def escape_direction(z: complex, obstacles: list[tuple[complex, complex]], length: float) -> complex:
    """A direction d such that the segment [z, z + length d] meets none of the obstacles."""
    for d in _escape_directions():
        end = z + length * d
        if not any(segments_cross(z, end, p, q) for p, q in obstacles):
            return d
    raise OnCutError(f"no straight escape from z={z} avoids the cuts")


def chord_segments(geometry: TwoCutGeometry, ctx: PrecisionContext) -> list[tuple[complex, complex]]:
    return [(complex(p), complex(q)) for p, q in geometry.chords(ctx).values()]


def _continuation_path(z: complex, geometry: TwoCutGeometry, ctx: PrecisionContext) -> list[complex]:
    """
    A polyline from a large positive anchor to z that avoids Gamma(-inf, b_2]: a straight
    leg out of z, then an arc of a large circle that stays clear of the ray left of -b_2.
    """
    rho = 2 * geometry.scale() + 2
    length = rho + abs(z) + 1
    minus_b2 = -complex(geometry.b2)
    far_left = minus_b2 - 4 * length
    obstacles = chord_segments(geometry, ctx) + [(minus_b2, far_left)]
    d = escape_direction(z, obstacles, length)
    q = z + length * d
    radius = abs(q)
    h = minus_b2.imag
    ray_angle = math.atan2(h, -math.sqrt(max(radius * radius - h * h, 0.0)))
    start = math.atan2(q.imag, q.real)
    if start > 0 and ray_angle > 0 and start >= ray_angle:
        end = 2 * math.pi
    elif start < 0 and ray_angle < 0 and start <= ray_angle:
        end = -2 * math.pi
    else:
        end = 0.0
    count = max(2, int(abs(end - start) / (math.pi / 16)) + 1)
    arc = [radius * complex(math.cos(a), math.sin(a)) for a in np.linspace(end, start, count)]
    leg = [q + (z - q) * s for s in np.linspace(0.0, 1.0, 33)[1:]]
    return arc + leg


def _joukowski(z, geometry: TwoCutGeometry, ctx: PrecisionContext, root=None):
    """L = (z^2 + t + R^(1/2))/2, which satisfies L + 1/L = z^2 + t."""
    t = geometry.t_value(ctx)
    root = r_sqrt(z, geometry, ctx) if root is None else root
    return (z * z + t + root) / 2


def _log_increment(a, b, value_a, value_b, geometry: TwoCutGeometry, ctx: PrecisionContext, depth: int = 0):
    """Change of log L from a to b, bisecting until each piece turns L by at most pi/4."""
    mp = ctx.mp
    ratio = value_b / value_a
    if abs(mp.arg(ratio)) <= mp.pi / 4 or depth >= 16:
        return mp.log(ratio)
    middle = (a + b) / 2
    value_m = _joukowski(middle, geometry, ctx)
    return (_log_increment(a, middle, value_a, value_m, geometry, ctx, depth + 1)
            + _log_increment(middle, b, value_m, value_b, geometry, ctx, depth + 1))


def _continued_log_l(z, geometry: TwoCutGeometry, ctx: PrecisionContext, value=None) -> mpmath.mpc:
    """log L continued from +infinity (where it is ~ 2 log z) inside the complement of Gamma(-inf, b_2]."""
    mp = ctx.mp
    points = [mp.mpc(p) for p in _continuation_path(complex(z), geometry, ctx)]
    points[-1] = z
    values = [_joukowski(p, geometry, ctx) for p in points]
    anchored = mp.log(values[0])
    for k in range(len(points) - 1):
        anchored += _log_increment(points[k], points[k + 1], values[k], values[k + 1], geometry, ctx)
    principal = mp.log(_joukowski(z, geometry, ctx) if value is None else value)
    winding = mp.nint(mp.im(anchored - principal) / (2 * mp.pi))
    return principal + 2 * mp.pi * mp.j * winding


def eta_b2(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """eta(z) = -2 int_{b_2}^z Q^(1/2) = -(z^2 + t) R^(1/2)/4 + log((z^2 + t + R^(1/2))/2)."""
    z = ctx.convert(z)
    if abs(z - ctx.convert(geometry.b2)) <= ctx.cut_tol * geometry.scale():
        return ctx.mp.mpc(0)
    check_off_cuts(z, geometry, ctx, include_gap=True)
    t = geometry.t_value(ctx)
    root = r_sqrt(z, geometry, ctx)
    return -(z * z + t) * root / 4 + _continued_log_l(z, geometry, ctx, value=_joukowski(z, geometry, ctx, root))


def re_eta(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpf:
    """Re eta, which needs no logarithm branch."""
    mp = ctx.mp
    z = ctx.convert(z)
    t = geometry.t_value(ctx)
    root = r_sqrt(z, geometry, ctx)
    return mp.re(-(z * z + t) * root / 4) + mp.log(abs(_joukowski(z, geometry, ctx, root)))


def left_of_gamma(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> bool:
    """Whether z lies left of Gamma oriented from -infinity to +infinity."""
    z = complex(ctx.convert(z))
    a2, b2 = complex(geometry.a2), complex(geometry.b2)
    far = 4 * (abs(z) + geometry.scale() + 1)
    polyline = [-b2 - far, -b2, -a2, a2, b2, b2 + far]
    top = complex(z.real, far + abs(z.imag) + far)
    crossings = sum(segments_cross(z, top, p, q) for p, q in zip(polyline, polyline[1:]))
    return crossings % 2 == 0


def eta_e(z, e: str, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """
    eta_e(z) = -2 int_e^z Q^(1/2) for e in {"b2", "a2", "-a2", "-b2"}; these differ from
    eta_{b_2} by pi i (e = ±a_2) or 2 pi i (e = -b_2), with the sign given by the side of Gamma.
    """
    mp = ctx.mp
    z = ctx.convert(z)
    shifts = {"b2": 0, "a2": 1, "-a2": 1, "-b2": 2}
    if e not in shifts:
        raise ValueError(f"unknown base endpoint {e!r}")
    a2, b2 = geometry.endpoints(ctx)
    base = {"b2": b2, "a2": a2, "-a2": -a2, "-b2": -b2}[e]
    if abs(z - base) <= ctx.cut_tol * geometry.scale():
        return mp.mpc(0)
    value = eta_b2(z, geometry, ctx)
    if shifts[e] == 0:
        return value
    sign = 1 if left_of_gamma(z, geometry, ctx) else -1
    return value - sign * shifts[e] * mp.pi * mp.j


def g_fun(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """g = (V + ell_* + eta)/2, with g(z) - log z -> 0 at infinity."""
    z = ctx.convert(z)
    t = geometry.t_value(ctx)
    return (potential(z, t) + ctx.convert(geometry.ell_star) + eta_b2(z, geometry, ctx)) / 2


def g_prime(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    z = ctx.convert(z)
    t = geometry.t_value(ctx)
    return (z**3 + t * z) / 2 - q_sqrt(z, geometry, ctx)


def g_gap_jump(x, geometry: TwoCutGeometry, ctx: PrecisionContext, offset=None) -> mpmath.mpc:
    """g_+ - g_- across the gap arc I at x, sampling just left and right of its orientation."""
    mp = ctx.mp
    x = ctx.convert(x)
    p, q = geometry.chords(ctx)["I"]
    normal = mp.j * (q - p) / abs(q - p)
    offset = ctx.mp.ldexp(1, -(ctx.prec_bits // 2)) if offset is None else offset
    return g_fun(x + offset * normal, geometry, ctx) - g_fun(x - offset * normal, geometry, ctx)


def g_boundary_sum(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """g_+ + g_- - V - ell_* on a cut; R^(1/2) flips sign so only the logarithms survive."""
    mp = ctx.mp
    x = ctx.convert(x)
    name = locate_on_cut(x, geometry, ctx)
    p, q = geometry.chords(ctx)[name]
    normal = mp.j * (q - p) / abs(q - p)
    offset = mp.ldexp(1, -(ctx.prec_bits // 2)) * geometry.scale()
    plus, minus = r_sqrt_boundary(x, geometry, ctx)
    total = mp.mpc(0)
    for side, root in ((1, plus), (-1, minus)):
        near = x + side * offset * normal
        reference = _continued_log_l(near, geometry, ctx)
        value = mp.log(_joukowski(x, geometry, ctx, root))
        total += value + 2 * mp.pi * mp.j * mp.nint(mp.im(reference - value) / (2 * mp.pi))
    return total / 2


class SzegoKind(str, Enum):
    D_CAL = "D_cal"
    D_NORM = "D_norm"


def szego_exponent(z, geometry: TwoCutGeometry, which: SzegoKind, ctx: PrecisionContext) -> mpmath.mpc:
    """log D(z) on the branch that vanishes at infinity for D_NORM; real powers D^p are exp(p log D)."""
    z = ctx.convert(z)
    check_off_cuts(z, geometry, ctx)
    t = geometry.t_value(ctx)
    exponent = potential(z, t) / 2 - (z * z + t) * r_sqrt(z, geometry, ctx) / 8
    if SzegoKind(which) == SzegoKind.D_NORM:
        exponent += ctx.convert(geometry.ell_star) / 2
    return exponent


def szego(z, geometry: TwoCutGeometry, which: SzegoKind, ctx: PrecisionContext) -> mpmath.mpc:
    """script-D(z) = exp(V/2 - (z^2 + t) R^(1/2)/8); the normalized D = e^(ell_*/2) script-D has D(inf) = 1."""
    return ctx.mp.exp(szego_exponent(z, geometry, which, ctx))


def szego_at_infinity(geometry: TwoCutGeometry, which: SzegoKind, ctx: PrecisionContext) -> mpmath.mpc:
    if SzegoKind(which) == SzegoKind.D_NORM:
        return ctx.mp.mpc(1)
    return ctx.mp.exp(-ctx.convert(geometry.ell_star) / 2)


def szego_boundary_product(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """script-D_+ script-D_- e^{-V} on a cut, which is identically 1."""
    mp = ctx.mp
    x = ctx.convert(x)
    t = geometry.t_value(ctx)
    plus, minus = r_sqrt_boundary(x, geometry, ctx)
    w = x * x + t
    d_plus = mp.exp(potential(x, t) / 2 - w * plus / 8)
    d_minus = mp.exp(potential(x, t) / 2 - w * minus / 8)
    return d_plus * d_minus * mp.exp(-potential(x, t))


def density(x, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """d mu_t/dx = Q_+^(1/2)(x)/(pi i) along the oriented chord through x."""
    mp = ctx.mp
    x = ctx.convert(x)
    plus, _ = r_sqrt_boundary(x, geometry, ctx)
    return x * plus / 2 / (mp.pi * mp.j)


def cut_mass(geometry: TwoCutGeometry, cut: str, ctx: PrecisionContext,
             realization: CutRealization = CutRealization.CHORDS) -> mpmath.mpc:
    """mu_t(J_j); each cut carries mass 1/2."""
    mp = ctx.mp
    if cut not in ("J1", "J2"):
        raise ValueError(f"cut must be J1 or J2, got {cut!r}")
    if CutRealization(realization) == CutRealization.TRACED_ARCS:
        return mp.mpf(_traced_cut_mass(geometry, cut, ctx))
    p, q = geometry.chords(ctx)[cut]
    return mp.quad(lambda s: density(p + s * (q - p), geometry, ctx) * (q - p), [0, 1])


def _traced_cut_mass(geometry: TwoCutGeometry, cut: str, ctx: PrecisionContext) -> float:
    """(1/pi) int |Q|^(1/2) |dz| along the traced short trajectory, where Q^(1/2) dz/(pi i) is positive."""
    a2, b2 = (complex(v) for v in geometry.endpoints(ctx))
    start, target = (a2, b2) if cut == "J2" else (-a2, -b2)
    path = None
    for k in range(3):
        result = trace_trajectory(start, k, geometry, ctx)
        if result.endpoint is not None and abs(result.endpoint - target) < 1e-6:
            path = result.points
            break
    if path is None:
        raise StepLimit(f"no short trajectory joins {start} to {target}")
    t = complex(geometry.t)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    starts, ends = path[:-1], path[1:]
    # Gauss-Legendre on every polyline segment
    samples = (starts[:, None] + ends[:, None]) / 2 + np.outer(ends - starts, nodes) / 2
    q_abs = np.sqrt(np.abs(_q_numpy(samples, t)))
    lengths = np.abs(ends - starts) / 2
    return float(np.sum(q_abs @ weights * lengths) / np.pi)


def resolvent(z, geometry: TwoCutGeometry, ctx: PrecisionContext) -> mpmath.mpc:
    """int d mu_t(x)/(z - x) by quadrature over the chords; equals g'(z) off the cuts."""
    mp = ctx.mp
    z = ctx.convert(z)
    total = mp.mpc(0)
    for name in ("J1", "J2"):
        p, q = geometry.chords(ctx)[name]
        total += mp.quad(lambda s: density(p + s * (q - p), geometry, ctx) * (q - p) / (z - p - s * (q - p)), [0, 1])
    return total


@dataclass(frozen=True)
class BranchFunction:
    """One of the branched functions of the geometry as a callable of z."""
    kind: BranchKind
    geometry: TwoCutGeometry
    base_endpoint: str = "b2"

    def evaluate(self, z, ctx: PrecisionContext) -> PrecisionComplex:
        kind = BranchKind(self.kind)
        if kind == BranchKind.R_SQRT:
            value = r_sqrt(z, self.geometry, ctx)
        elif kind == BranchKind.Q_SQRT:
            value = q_sqrt(z, self.geometry, ctx)
        elif kind == BranchKind.ETA_E:
            value = eta_e(z, self.base_endpoint, self.geometry, ctx)
        elif kind == BranchKind.G:
            value = g_fun(z, self.geometry, ctx)
        elif kind == BranchKind.SZEGO_D:
            value = szego(z, self.geometry, SzegoKind.D_CAL, ctx)
        else:
            value = szego(z, self.geometry, SzegoKind.D_NORM, ctx)
        return ctx.wrap(value)


# Trajectories of the quadratic differential -Q(z) dz^2, traced in double precision.

class TrajectoryKind(str, Enum):
    TRAJECTORY = "trajectory"
    ORTHOGONAL = "orthogonal"


class Termination(str, Enum):
    CRITICAL_POINT = "critical_point"
    ESCAPE = "escape"


@dataclass(frozen=True)
class TrajectoryResult:
    points: np.ndarray
    termination: Termination
    endpoint: complex | None

    @property
    def final_angle(self) -> float:
        return float(np.angle(self.points[-1]))


def _q_numpy(z, t: complex):
    z = np.asarray(z, dtype=np.complex128)
    z2 = z * z
    return z2 * ((z2 + t) ** 2 - 4) / 4


def start_angles(e: complex, geometry: TwoCutGeometry, kind: TrajectoryKind) -> list[float]:
    """The three directions leaving a simple zero e, from Q ~ Q'(e)(z - e) with Q'(e) = e^3 (e^2 + t)."""
    t = complex(geometry.t)
    derivative = e**3 * (e * e + t)
    phase = np.pi if TrajectoryKind(kind) == TrajectoryKind.TRAJECTORY else 0.0
    return [float((phase - np.angle(derivative) + 2 * np.pi * k) / 3) for k in range(3)]


def trace_trajectory(start: complex, direction, geometry: TwoCutGeometry, ctx: PrecisionContext,
                     kind: TrajectoryKind = TrajectoryKind.TRAJECTORY, max_steps: int = 20000,
                     tol: float = 1e-10, snap_radius: float = 1e-6,
                     escape_radius: float | None = None) -> TrajectoryResult:
    """
    Follow -Q dz^2 > 0 (or < 0 for orthogonal trajectories) at unit speed with RK4 and step
    doubling. `direction` is either an index 0..2 into the start angles at a zero of Q or an
    initial angle. Stops at a critical point other than the start or beyond escape_radius.
    """
    t = complex(geometry.t)
    start = complex(start)
    kind = TrajectoryKind(kind)
    critical = [complex(v) for v in geometry.branch_points(ctx)] + [0j]
    escape_radius = escape_radius or 10 * geometry.scale() + 10
    if isinstance(direction, int):
        angle = start_angles(start, geometry, kind)[direction]
    else:
        angle = float(direction)
    heading = complex(np.exp(1j * angle))
    rotation = 1j if kind == TrajectoryKind.TRAJECTORY else 1.0

    def field(z: complex, previous: complex) -> complex:
        root = complex(np.sqrt(_q_numpy(z, t)))
        if root == 0:
            return previous
        v = rotation * np.conj(root) / abs(root)
        return v if (v * np.conj(previous)).real >= 0 else -v

    def rk4(z: complex, h: float, previous: complex) -> tuple[complex, complex]:
        k1 = field(z, previous)
        k2 = field(z + h / 2 * k1, k1)
        k3 = field(z + h / 2 * k2, k2)
        k4 = field(z + h * k3, k3)
        return z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), k4

    h = 1e-3 * geometry.scale()
    z = start + h * heading
    points = [start, z]
    for _ in range(max_steps):
        distances = [abs(z - c) for c in critical if abs(c - start) > snap_radius]
        nearest = min(distances) if distances else math.inf
        if nearest < snap_radius:
            endpoint = min((c for c in critical if abs(c - start) > snap_radius), key=lambda c: abs(z - c))
            points.append(endpoint)
            return TrajectoryResult(np.array(points), Termination.CRITICAL_POINT, endpoint)
        if abs(z) > escape_radius:
            return TrajectoryResult(np.array(points), Termination.ESCAPE, None)
        h = min(h, 0.5 * nearest, 0.05 * escape_radius)
        full, _ = rk4(z, h, heading)
        half, mid_heading = rk4(z, h / 2, heading)
        double, new_heading = rk4(half, h / 2, mid_heading)
        error = abs(full - double)
        if error > tol and h > 1e-12:
            h /= 2
            continue
        z = double
        heading = new_heading
        points.append(z)
        if error < tol / 32:
            h *= 2
    raise StepLimit(f"trajectory from {start} did not terminate within {max_steps} steps")


def short_trajectory_closes(start: complex, target: complex, geometry: TwoCutGeometry, ctx: PrecisionContext,
                            radius: float = 1e-6) -> bool:
    for k in range(3):
        result = trace_trajectory(start, k, geometry, ctx)
        if result.endpoint is not None and abs(result.endpoint - target) < radius:
            return True
    return False


TRIPLE_POINTS = (complex(0, math.sqrt(12)), complex(0, -math.sqrt(12)))


def _gap_margin(geometry: TwoCutGeometry, ctx: PrecisionContext, samples: int = 17) -> tuple[float, float]:
    """(max Re eta, max |Re eta|) over interior points of the gap chord."""
    mp = ctx.mp
    p, q = geometry.chords(ctx)["I"]
    values = [float(re_eta(p + mp.mpf(k) / (samples + 1) * (q - p), geometry, ctx)) for k in range(1, samples + 1)]
    return max(values), max(abs(v) for v in values)


def classify_region(t, ctx: PrecisionContext, geometry: TwoCutGeometry | None = None,
                    tol: float = 1e-6) -> Region:
    """
    Heuristic region label under the two-cut ansatz. O2 when the short trajectories
    a_2 -> b_2 (and by evenness -a_2 -> -b_2) close and Re eta < 0 inside the gap. A gap on
    which Re eta vanishes identically means the cuts have merged into one (O1); otherwise a
    trajectory from a_2 into the origin signals the extra central cut of O3.
    """
    mp = ctx.mp
    t = ctx.convert(t)
    geometry = geometry or two_cut_geometry(t, ctx, classify=False)
    a2, b2 = (complex(v) for v in geometry.endpoints(ctx))
    if abs(a2) < tol or abs(b2) < tol or any(abs(complex(t) - p) < tol for p in TRIPLE_POINTS):
        return Region.BOUNDARY
    highest, largest = _gap_margin(geometry, ctx)
    if largest <= tol:
        return Region.O1
    try:
        closes = short_trajectory_closes(a2, b2, geometry, ctx)
        if closes and highest < -tol:
            return Region.O2
        if highest > tol:
            into_origin = any(
                trace_trajectory(a2, k, geometry, ctx).endpoint == 0j for k in range(3)
            )
            return Region.O3 if into_origin else Region.O1
    except StepLimit as e:
        logging.warning(f"Trajectory tracing failed while classifying t={mp.nstr(t, 10)}: {e}")
        return Region.UNKNOWN
    return Region.BOUNDARY


@dataclass(frozen=True)
class SignChart:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    near_cut: np.ndarray


def sign_chart(geometry: TwoCutGeometry, x0: float, x1: float, y0: float, y1: float, nx: int, ny: int,
               ctx: PrecisionContext) -> SignChart:
    """Re eta sampled on a grid; samples within a few cut tolerances of a cut are flagged."""
    mp = ctx.mp
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    values = np.empty((ny, nx))
    near_cut = np.zeros((ny, nx), dtype=bool)
    spacing = min((x1 - x0) / max(nx - 1, 1), (y1 - y0) / max(ny - 1, 1))
    chords = geometry.chords(ctx)
    for row, y in enumerate(ys):
        for col, x in enumerate(xs):
            z = mp.mpc(x, y)
            near_cut[row, col] = any(
                segment_distance(mp, z, p, q) < 1e-3 * spacing for name, (p, q) in chords.items() if name != "I"
            )
            values[row, col] = float(re_eta(z, geometry, ctx))
    return SignChart(xs=xs, ys=ys, values=values, near_cut=near_cut)
