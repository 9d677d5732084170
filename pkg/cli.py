"""
Command-line surface of the lab.

Every command validates its flags into a RunConfig, runs one pipeline and writes either a
CSV (a `#` metadata line, a header row, one row per record) or a JSON list of flat records
to --out or stdout. Nothing is read from the environment.
"""
import csv
import io
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Annotated, Optional

import typer
from pydantic import BaseModel, Field, ValidationError, model_validator

from asymptotics.harness import ScalingSequence, error_table
from asymptotics.predictors import Quantity
from core.errors import QuarticLabError
from core.precision import MIN_PREC_BITS, PrecisionContext
from geometry.riemann_surface import (
    abel_zero_defect,
    build_theta_evaluator,
    surface_data,
    theta_identity_residual,
    theta_ratio_at_infinity,
    theta_ratio_at_zero,
)
from geometry.spectral_curve import TrajectoryKind, sign_chart, trace_trajectory, two_cut_geometry
from painleve.dictionary import dictionary_check
from painleve.pole_scan import HankelFactor, Window, pole_scan
from painleve.symmetric import (
    p4_ode_residual,
    sigma_form_residual,
    sigma_from_triple,
    tower,
    tower_sigma_derivatives,
)
from painleve.tau import toda_residual
from polys.hankel import factorization_residuals, hankel_dets, op_sequence, string_equation_residual
from polys.moments import ModelPoint, MomentProvenance, moment_table
from polys.orthopoly import build_pn, orthogonality_check

GRID_CELL_LIMIT = 10**7

app = typer.Typer(
    help="Quartic-weight orthogonal polynomials, two-cut geometry and Painlevé-IV checks.",
    add_completion=False,
    no_args_is_help=True,
)


class Command(str, Enum):
    MOMENTS = "moments"
    HANKEL = "hankel"
    OP_TABLE = "op-table"
    ORTHO_CHECK = "ortho-check"
    SIGN_CHART = "sign-chart"
    TRACE = "trace"
    SURFACE_CHECK = "surface-check"
    THETA_CHECK = "theta-check"
    P4_TOWER = "p4-tower"
    P4_RESIDUALS = "p4-residuals"
    ASYM_COMPARE = "asym-compare"
    POLE_SCAN = "pole-scan"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Endpoint(str, Enum):
    A2 = "a2"
    B2 = "b2"
    MINUS_A2 = "-a2"
    MINUS_B2 = "-b2"


class RunConfig(BaseModel):
    """
    Validated flags of one run. Fields a command does not use keep their defaults and are
    still recorded in the metadata line.
    """
    command: Command
    t_re: float = 0.0
    t_im: float = 0.0
    N: float = Field(1.0, gt=0)
    n: int = Field(1, ge=0)
    n_min: int = Field(1, ge=1)
    n_max: int = Field(10, ge=0)
    m: int = 0
    x_re: float = 0.0
    x_im: float = 0.0
    prec_bits: int = Field(128, ge=MIN_PREC_BITS)
    window: Optional[tuple[float, float, float, float]] = None
    nx: int = Field(2, ge=2)
    ny: int = Field(2, ge=2)
    provenance: Optional[MomentProvenance] = None
    quantity: Optional[Quantity] = None
    sequence: Optional[ScalingSequence] = None
    z: Optional[float] = None
    factor: Optional[HankelFactor] = None
    start: Optional[Endpoint] = None
    direction: int = Field(0, ge=0, le=2)
    angle: Optional[float] = None
    kind: Optional[TrajectoryKind] = None
    max_steps: int = Field(20000, ge=1)
    out_path: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV

    @model_validator(mode="after")
    def check_grid(self):
        if self.nx * self.ny > GRID_CELL_LIMIT:
            raise ValueError(f"grid of {self.nx} x {self.ny} nodes exceeds {GRID_CELL_LIMIT} cells")
        if self.window is not None:
            x0, x1, y0, y1 = self.window
            if not (x0 < x1 and y0 < y1):
                raise ValueError(f"empty window [{x0}, {x1}] x [{y0}, {y1}]")
        if self.n_max < self.n_min and self.command == Command.ASYM_COMPARE:
            raise ValueError(f"n_max={self.n_max} is below n_min={self.n_min}")
        return self

    def context(self) -> PrecisionContext:
        return PrecisionContext(self.prec_bits)

    def t_value(self, ctx: PrecisionContext):
        return ctx.mp.mpc(self.t_re, self.t_im)

    def x_value(self, ctx: PrecisionContext):
        return ctx.mp.mpc(self.x_re, self.x_im)

    def metadata(self) -> str:
        return json.dumps(self.model_dump(mode="json", exclude={"out_path"}), sort_keys=True)


class Record(BaseModel):
    """One output row. z is the evaluation point where a record has one."""
    quantity: str
    n: int
    t_re: str
    t_im: str
    z_re: str = ""
    z_im: str = ""
    value_re: str
    value_im: str
    err_abs: str = ""


class RecordWriter:
    def __init__(self, config: RunConfig, ctx: PrecisionContext):
        self.config = config
        self.ctx = ctx
        self.records: list[Record] = []

    def _pair(self, value) -> tuple[str, str]:
        return self.ctx.wrap(value).as_strings()

    def _real(self, value) -> str:
        return self.ctx.mp.nstr(self.ctx.mp.mpf(value), self.ctx.wrap(0).digits())

    def add(self, quantity: str, n: int, value, err=None, z=None):
        t_re, t_im = self._pair(self.config.t_value(self.ctx))
        value_re, value_im = self._pair(value)
        z_re, z_im = self._pair(z) if z is not None else ("", "")
        self.records.append(Record(
            quantity=quantity,
            n=n,
            t_re=t_re,
            t_im=t_im,
            z_re=z_re,
            z_im=z_im,
            value_re=value_re,
            value_im=value_im,
            err_abs="" if err is None else self._real(err),
        ))

    def render(self) -> str:
        if self.config.format == OutputFormat.JSON:
            return json.dumps([r.model_dump() for r in self.records], indent=2) + "\n"
        buffer = io.StringIO()
        buffer.write(f"# quartic-lab {self.config.command.value} {self.config.metadata()}\n")
        writer = csv.DictWriter(buffer, fieldnames=list(Record.model_fields), lineterminator="\n")
        writer.writeheader()
        for record in self.records:
            writer.writerow(record.model_dump())
        return buffer.getvalue()

    def flush(self):
        text = self.render()
        if self.config.out_path is None:
            typer.echo(text, nl=False)
        else:
            self.config.out_path.write_text(text)
            logging.info(f"Wrote {len(self.records)} records to {self.config.out_path}")


def _configure(command: Command, **flags) -> RunConfig:
    try:
        return RunConfig(command=command, **flags)
    except ValidationError as e:
        typer.echo(f"Invalid configuration for {command.value}: {e}", err=True)
        raise typer.Exit(code=2)


def _run(config: RunConfig, body):
    """Run body(config, ctx, writer) and flush; numeric failures become exit code 3."""
    ctx = config.context()
    writer = RecordWriter(config, ctx)
    try:
        body(config, ctx, writer)
    except QuarticLabError as e:
        record = {"error": type(e).__name__, "message": str(e), "command": config.command.value}
        typer.echo(json.dumps(record), err=True)
        raise typer.Exit(code=3)
    except ValueError as e:
        typer.echo(f"Invalid configuration for {config.command.value}: {e}", err=True)
        raise typer.Exit(code=2)
    writer.flush()


def _point(config: RunConfig, ctx: PrecisionContext) -> ModelPoint:
    return ModelPoint(t=ctx.wrap(config.t_value(ctx)), N=config.N)


TRe = Annotated[float, typer.Option("--t", help="Real part of t.")]
TIm = Annotated[float, typer.Option("--t-im", help="Imaginary part of t.")]
NOpt = Annotated[float, typer.Option("--N", help="The positive scaling N.")]
PrecBits = Annotated[int, typer.Option("--prec-bits", help="Binary working precision.")]
OutPath = Annotated[Optional[Path], typer.Option("--out", help="Output file; stdout when omitted.")]
Format = Annotated[OutputFormat, typer.Option("--format")]
XRe = Annotated[float, typer.Option("--x", help="Real part of the Painlevé variable x.")]
XIm = Annotated[float, typer.Option("--x-im", help="Imaginary part of x.")]
WindowOpt = Annotated[
    Optional[tuple[float, float, float, float]],
    typer.Option("--window", help="x0 x1 y0 y1 of the sampled rectangle."),
]


@app.command()
def moments(t: TRe = -3.0, t_im: TIm = 0.0, N: NOpt = 1.0,
            m: Annotated[int, typer.Option("--m", min=2)] = 4,
            provenance: Annotated[MomentProvenance, typer.Option("--provenance")] = MomentProvenance.RECURSION,
            prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Moments mu_0..mu_{2m}; err_abs is the distance to the closed form."""
    config = _configure(Command.MOMENTS, t_re=t, t_im=t_im, N=N, m=m, provenance=provenance,
                        prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        point = _point(config, ctx)
        table = moment_table(point, config.m, ctx, provenance=config.provenance)
        exact = moment_table(point, config.m, ctx, provenance=MomentProvenance.CLOSED_FORM).values(ctx)
        for k, value in enumerate(table.values(ctx)):
            writer.add("mu", k, value, err=abs(value - exact[k]))

    _run(config, body)


@app.command()
def hankel(t: TRe = -3.0, t_im: TIm = 0.0, N: NOpt = 1.0,
           m: Annotated[int, typer.Option("--m", min=0)] = 6,
           prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """H_0..H_m; err_abs is the relative defect of the even/odd factorization."""
    config = _configure(Command.HANKEL, t_re=t, t_im=t_im, N=N, m=m, prec_bits=prec_bits,
                        out_path=out, format=fmt)

    def body(config, ctx, writer):
        family = hankel_dets(_point(config, ctx), config.m, ctx)
        work = ctx if family.prec_bits == ctx.prec_bits else ctx.with_prec(family.prec_bits)
        residuals = factorization_residuals(family, work)
        for k, value in enumerate(family.H):
            writer.add("H_zero" if family.vanishes(k) else "H", k, value, err=residuals[k])

    _run(config, body)


@app.command("op-table")
def op_table(t: TRe = -3.0, t_im: TIm = 0.0, N: NOpt = 1.0,
             n_max: Annotated[int, typer.Option("--n-max", min=1)] = 10,
             prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """gamma_n^2, h_n and the sub-leading coefficients; err_abs of gamma_sq is the string equation."""
    config = _configure(Command.OP_TABLE, t_re=t, t_im=t_im, N=N, n_max=n_max, prec_bits=prec_bits,
                        out_path=out, format=fmt)

    def body(config, ctx, writer):
        sequence = op_sequence(_point(config, ctx), config.n_max, ctx)
        for n in range(config.n_max + 1):
            if not sequence.degree_full[n]:
                writer.add("degenerate_degree", n, 0)
                continue
            if sequence.gamma_sq[n] is not None:
                err = None
                if n + 1 <= sequence.m and sequence.gamma_sq[n + 1] is not None:
                    err = abs(string_equation_residual(sequence, n, ctx))
                writer.add("gamma_sq", n, sequence.gamma_sq[n], err=err)
            if sequence.h[n] is not None:
                writer.add("h", n, sequence.h[n])
            if sequence.p_sub2[n] is not None:
                writer.add("p_sub2", n, sequence.p_sub2[n])
                writer.add("p_sub4", n, sequence.p_sub4[n])

    _run(config, body)


@app.command("ortho-check")
def ortho_check(t: TRe = -3.0, t_im: TIm = 0.0, N: NOpt = 1.0,
                n: Annotated[int, typer.Option("--n", min=1)] = 4,
                prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Integrals of z^k P_n for k < n by quadrature; err_abs is relative to the integral of the modulus."""
    config = _configure(Command.ORTHO_CHECK, t_re=t, t_im=t_im, N=N, n=n, prec_bits=prec_bits,
                        out_path=out, format=fmt)

    def body(config, ctx, writer):
        point = _point(config, ctx)
        poly = build_pn(point, config.n, ctx)
        for k in range(config.n):
            value, mass = orthogonality_check(point, config.n, k, ctx, poly=poly)
            writer.add("orthogonality", k, value, err=abs(value) / mass if mass else 0)

    _run(config, body)


@app.command("sign-chart")
def sign_chart_command(t: TRe = -3.0, t_im: TIm = 0.0, window: WindowOpt = (-3.0, 3.0, -2.0, 2.0),
                       nx: Annotated[int, typer.Option("--nx")] = 61,
                       ny: Annotated[int, typer.Option("--ny")] = 41,
                       prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Re eta on a grid; samples next to J_1 or J_2 are reported as re_eta_near_cut."""
    config = _configure(Command.SIGN_CHART, t_re=t, t_im=t_im, window=window, nx=nx, ny=ny,
                        prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        geometry = two_cut_geometry(config.t_value(ctx), ctx, classify=False)
        chart = sign_chart(geometry, *config.window, config.nx, config.ny, ctx)
        for row, y in enumerate(chart.ys):
            for col, x in enumerate(chart.xs):
                quantity = "re_eta_near_cut" if chart.near_cut[row, col] else "re_eta"
                writer.add(quantity, row * config.nx + col, float(chart.values[row, col]),
                           z=complex(float(x), float(y)))

    _run(config, body)


@app.command()
def trace(t: TRe = -3.0, t_im: TIm = 0.0,
          start: Annotated[Endpoint, typer.Option("--start")] = Endpoint.A2,
          direction: Annotated[int, typer.Option("--direction", min=0, max=2)] = 0,
          angle: Annotated[Optional[float], typer.Option("--angle", help="Initial angle; overrides --direction.")] = None,
          kind: Annotated[TrajectoryKind, typer.Option("--kind")] = TrajectoryKind.TRAJECTORY,
          max_steps: Annotated[int, typer.Option("--max-steps", min=1)] = 20000,
          prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """A trajectory of -Q dz^2 from a branch point; the last record names how it ended."""
    config = _configure(Command.TRACE, t_re=t, t_im=t_im, start=start, direction=direction, angle=angle,
                        kind=kind, max_steps=max_steps, prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        geometry = two_cut_geometry(config.t_value(ctx), ctx, classify=False)
        a2, b2 = (complex(v) for v in geometry.endpoints(ctx))
        origin = {Endpoint.A2: a2, Endpoint.B2: b2, Endpoint.MINUS_A2: -a2, Endpoint.MINUS_B2: -b2}[config.start]
        initial = config.direction if config.angle is None else config.angle
        result = trace_trajectory(origin, initial, geometry, ctx, kind=config.kind, max_steps=config.max_steps)
        for k, z in enumerate(result.points):
            writer.add(f"{config.kind.value}_point", k, complex(z))
        last = result.endpoint if result.endpoint is not None else complex(result.points[-1])
        writer.add(f"end_{result.termination.value}", len(result.points) - 1, last)

    _run(config, body)


@app.command("surface-check")
def surface_check(t: TRe = -3.0, t_im: TIm = 0.0, prec_bits: PrecBits = 128,
                  out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Periods and Abel images; err_abs of the zero images is the lattice defect of their difference."""
    config = _configure(Command.SURFACE_CHECK, t_re=t, t_im=t_im, prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        surface = surface_data(two_cut_geometry(config.t_value(ctx), ctx, classify=False), ctx)
        defect = abel_zero_defect(surface, ctx)
        writer.add("B", 0, surface.B)
        writer.add("alpha_norm", 0, surface.alpha_norm)
        writer.add("abel_zero", 0, surface.abel_zero0, err=defect)
        writer.add("abel_zero", 1, surface.abel_zero1, err=defect)
        writer.add("abel_infinity", 0, surface.abel_inf0)
        writer.add("abel_infinity", 1, surface.abel_inf1)

    _run(config, body)


@app.command("theta-check")
def theta_check(t: TRe = -3.0, t_im: TIm = 0.0, prec_bits: PrecBits = 128,
                out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Theta quotients at the points at infinity and at 0^(1), where the quotient vanishes."""
    config = _configure(Command.THETA_CHECK, t_re=t, t_im=t_im, prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        geometry = two_cut_geometry(config.t_value(ctx), ctx, classify=False)
        surface = surface_data(geometry, ctx)
        evaluator = build_theta_evaluator(surface.B, ctx)
        at_infinity = [theta_ratio_at_infinity(k, surface, ctx, evaluator) for k in (0, 1)]
        writer.add("theta_infinity", 0, at_infinity[0])
        writer.add("theta_infinity", 1, at_infinity[1])
        writer.add("theta_infinity_ratio", 0, at_infinity[0] / at_infinity[1],
                   err=theta_identity_residual(surface, ctx))
        zero = theta_ratio_at_zero(1, surface, ctx, evaluator)
        writer.add("theta_zero", 1, zero, err=abs(zero))

    _run(config, body)


@app.command("p4-tower")
def p4_tower(x: XRe = 0.5, x_im: XIm = 0.0,
             n_max: Annotated[int, typer.Option("--n-max", min=0)] = 4,
             m: Annotated[int, typer.Option("--m", min=-1, max=0)] = 0,
             prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """The triples T_1^n of a seed for n = 0..n_max; err_abs of f_j is the constraint residual."""
    config = _configure(Command.P4_TOWER, x_re=x, x_im=x_im, n_max=n_max, m=m, prec_bits=prec_bits,
                        out_path=out, format=fmt)

    def body(config, ctx, writer):
        point = config.x_value(ctx)
        for n in range(config.n_max + 1):
            triple = tower(n, config.m, point, ctx)
            residual = abs(triple.constraint_residual())
            for j, value in enumerate(triple.values()):
                writer.add(f"f{j}", n, value, err=residual, z=point)
            writer.add("sigma", n, sigma_from_triple(triple), z=point)

    _run(config, body)


@app.command("p4-residuals")
def p4_residuals(x: XRe = 0.5, x_im: XIm = 0.0,
                 n_max: Annotated[int, typer.Option("--n-max", min=0)] = 3,
                 m: Annotated[int, typer.Option("--m", min=-1, max=0)] = 0,
                 prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """
    Residuals of the sigma form (value = printed form, err_abs = squared form), the scalar
    equation of each component, the Toda relation and the recurrence dictionary.
    """
    config = _configure(Command.P4_RESIDUALS, x_re=x, x_im=x_im, n_max=n_max, m=m, prec_bits=prec_bits,
                        out_path=out, format=fmt)

    def body(config, ctx, writer):
        point = config.x_value(ctx)
        for n in range(config.n_max + 1):
            triple = tower(n, config.m, point, ctx)
            form = sigma_form_residual(tower_sigma_derivatives(n, config.m, point, ctx), point, triple.alpha, ctx)
            writer.add("sigma_form", n, form.printed, err=abs(form.squared), z=point)
            for j, component in enumerate(triple.values()):
                if component == 0:
                    # f_0 of the seed is identically zero
                    continue
                residual = p4_ode_residual(n, config.m, j, point, ctx)
                writer.add(f"p4_ode_f{j}", n, residual, err=residual, z=point)
            toda = toda_residual(n, config.m, point, ctx)
            writer.add("toda", n, toda, err=toda, z=point)
            if config.m == 0:
                worst = dictionary_check(n, point, ctx).worst
                writer.add("dictionary", n, worst, err=worst, z=point)

    _run(config, body)


@app.command("asym-compare")
def asym_compare(quantity: Annotated[Quantity, typer.Option("--quantity")] = Quantity.GAMMA_SQ,
                 t: TRe = -3.0, t_im: TIm = 0.0,
                 n_min: Annotated[int, typer.Option("--n-min", min=1)] = 1,
                 n_max: Annotated[int, typer.Option("--n-max", min=1)] = 20,
                 sequence: Annotated[ScalingSequence, typer.Option("--sequence")] = ScalingSequence.DIAGONAL,
                 z: Annotated[float, typer.Option("--z", help="Evaluation point of P_outer.")] = 3.0,
                 x: Annotated[float, typer.Option("--x", help="Scaled Painlevé variable.")] = -3.0,
                 prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """Exact-versus-predicted errors for n_min..n_max followed by the fitted decay exponent."""
    config = _configure(Command.ASYM_COMPARE, quantity=quantity, t_re=t, t_im=t_im, n_min=n_min, n_max=n_max,
                        sequence=sequence, z=z, x_re=x, prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        report = error_table(config.quantity, config.t_value(ctx), config.n_min, config.n_max, ctx,
                             sequence=config.sequence, z=config.z, x=config.x_re)
        for n, err in report.errors:
            writer.add(config.quantity.value, n, err, err=err)
        for label, fit in (("even", report.decay_fit), ("odd", report.decay_fit_odd)):
            if fit is not None:
                writer.add(f"decay_exponent_{label}", config.n_max, fit)

    _run(config, body)


@app.command("pole-scan")
def pole_scan_command(n: Annotated[int, typer.Option("--n", min=1)] = 1, N: NOpt = 1.0,
                      window: WindowOpt = (-6.0, 6.0, -6.0, 6.0),
                      nx: Annotated[int, typer.Option("--nx")] = 200,
                      ny: Annotated[int, typer.Option("--ny")] = 200,
                      factor: Annotated[Optional[HankelFactor], typer.Option("--factor")] = None,
                      prec_bits: PrecBits = 128, out: OutPath = None, fmt: Format = OutputFormat.CSV):
    """
    Zeros of H^(e)_n and H^(o)_n in a t-window: value is t, z is x = t sqrt(N)/2 and err_abs
    the neighbour ratio, which is 1 at a simple zero.
    """
    config = _configure(Command.POLE_SCAN, n=n, N=N, window=window, nx=nx, ny=ny, factor=factor,
                        prec_bits=prec_bits, out_path=out, format=fmt)

    def body(config, ctx, writer):
        factors = (config.factor,) if config.factor is not None else (HankelFactor.EVEN, HankelFactor.ODD)
        result = pole_scan(config.n, Window(*config.window, config.nx, config.ny), config.N, ctx, factors=factors)
        for zero in result.zeros:
            writer.add(f"zero_H{zero.factor.value}", zero.n, zero.t, err=zero.neighbour_ratio, z=zero.x)
        for row, col in result.unresolved:
            writer.add("unresolved_cell", row * config.nx + col, 0)

    _run(config, body)


if __name__ == "__main__":
    app()
