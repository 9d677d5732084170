from typing import Annotated, List, Optional

from fastapi import APIRouter, Depends
from pydantic import BaseModel, Field

from api.schemas import ComplexValue, parse_complex, raise_http, request_context
from core.precision import PrecisionContext
from core.settings import get_precision_context
from painleve.symmetric import sigma_from_triple, tower

router = APIRouter(
    prefix="/painleve",
    tags=["painleve"],
)

Precision = Annotated[PrecisionContext, Depends(get_precision_context)]


class TowerRequest(BaseModel):
    """
    The triple T_1^n applied to the m = 0 or m = -1 parabolic cylinder seed, at x.
    """
    n: int = Field(ge=0, le=60, examples=[2])
    m: int = Field(0, ge=-1, le=0, examples=[0])
    x: ComplexValue = Field(examples=[{"re": "0.5", "im": "0"}])
    prec_bits: Optional[int] = Field(None, ge=64, examples=[128])


class TowerResponse(BaseModel):
    f: List[ComplexValue]
    # exact rationals such as "5/2"
    alpha: List[str] = Field(examples=[["-2", "5/2", "1/2"]])
    sigma: ComplexValue
    constraint_residual: str = Field(examples=["0.0"])
    lineage: List[str] = Field(examples=[["seed_m0", "T1", "T1"]])


@router.post("/tower", response_model=TowerResponse)
def compute_tower(request: TowerRequest, default_ctx: Precision):
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        triple = tower(request.n, request.m, parse_complex(request.x, ctx), ctx)
        return TowerResponse(
            f=[ComplexValue.of(v, ctx) for v in triple.f],
            alpha=[str(a) for a in triple.alpha],
            sigma=ComplexValue.of(sigma_from_triple(triple), ctx),
            constraint_residual=ctx.mp.nstr(abs(triple.constraint_residual()), 5),
            lineage=list(triple.lineage),
        )
    except Exception as e:
        raise_http(e, "build the Painlevé-IV tower")
