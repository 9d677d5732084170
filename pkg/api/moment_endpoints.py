from typing import Annotated, List, Optional

from fastapi import APIRouter, Depends
from pydantic import BaseModel, Field

from api.schemas import ComplexValue, ModelRequest, parse_complex, raise_http, request_context
from core.precision import PrecisionContext
from core.settings import get_precision_context
from polys.hankel import hankel_dets, op_sequence
from polys.moments import ModelPoint, MomentProvenance, moment_table

router = APIRouter(tags=["moments"])

Precision = Annotated[PrecisionContext, Depends(get_precision_context)]


class MomentRequest(ModelRequest):
    """
    Moments mu_0..mu_{2m} of e^{-N V(s; t)} on the real line.
    """
    m: int = Field(ge=2, le=200, examples=[4])
    provenance: MomentProvenance = Field(MomentProvenance.RECURSION, examples=["recursion"])


class MomentResponse(BaseModel):
    provenance: MomentProvenance
    prec_bits: int
    mu: List[ComplexValue]
    recursion_residual: str = Field(examples=["1.2e-37"])


class HankelRequest(ModelRequest):
    m: int = Field(ge=0, le=200, examples=[6])


class HankelResponse(BaseModel):
    """
    H_0..H_m with the zero flags of the minors; prec_bits is the precision actually used.
    """
    prec_bits: int
    H: List[ComplexValue]
    zero_flags: List[bool]


class OPTableRequest(ModelRequest):
    n_max: int = Field(ge=1, le=200, examples=[10])


class OPRow(BaseModel):
    n: int = Field(examples=[3])
    gamma_sq: Optional[ComplexValue] = None
    h: Optional[ComplexValue] = None
    p_sub2: Optional[ComplexValue] = None
    p_sub4: Optional[ComplexValue] = None
    degree_full: bool = True


class OPTableResponse(BaseModel):
    prec_bits: int
    rows: List[OPRow]


def _point(request: ModelRequest, ctx: PrecisionContext) -> ModelPoint:
    t = parse_complex(request.t, ctx)
    return ModelPoint(t=ctx.wrap(t), N=request.N)


@router.post("/moments", response_model=MomentResponse)
def compute_moments(request: MomentRequest, default_ctx: Precision):
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        table = moment_table(_point(request, ctx), request.m, ctx, provenance=request.provenance)
        return MomentResponse(
            provenance=table.provenance,
            prec_bits=ctx.prec_bits,
            mu=[ComplexValue.of(v, ctx) for v in table.mu],
            recursion_residual=ctx.mp.nstr(table.recursion_residual(ctx), 5),
        )
    except Exception as e:
        raise_http(e, "compute moments")


@router.post("/hankel", response_model=HankelResponse)
def compute_hankel(request: HankelRequest, default_ctx: Precision):
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        family = hankel_dets(_point(request, ctx), request.m, ctx)
        return HankelResponse(
            prec_bits=family.prec_bits,
            H=[ComplexValue.of(v, ctx) for v in family.H],
            zero_flags=list(family.zero_flags),
        )
    except Exception as e:
        raise_http(e, "compute Hankel determinants")


@router.post("/op-table", response_model=OPTableResponse)
def compute_op_table(request: OPTableRequest, default_ctx: Precision):
    """Recurrence data gamma_n^2, h_n, 𝔭_{n,n-2}, 𝔭_{n,n-4} for n = 0..n_max."""
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        sequence = op_sequence(_point(request, ctx), request.n_max, ctx)

        def cell(values, n):
            value = values[n] if n < len(values) else None
            return None if value is None else ComplexValue.of(value, ctx)

        rows = [
            OPRow(
                n=n,
                gamma_sq=cell(sequence.gamma_sq, n),
                h=cell(sequence.h, n),
                p_sub2=cell(sequence.p_sub2, n),
                p_sub4=cell(sequence.p_sub4, n),
                degree_full=sequence.degree_full[n],
            )
            for n in range(request.n_max + 1)
        ]
        return OPTableResponse(prec_bits=sequence.prec_bits, rows=rows)
    except Exception as e:
        raise_http(e, "compute the recurrence table")
