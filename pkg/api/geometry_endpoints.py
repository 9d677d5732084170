from typing import Annotated, Optional

from fastapi import APIRouter, Depends
from pydantic import BaseModel, Field

from api.schemas import ComplexValue, parse_complex, raise_http, request_context
from core.precision import PrecisionContext
from core.settings import get_precision_context
from geometry.riemann_surface import abel_zero_defect, surface_data, theta_identity_residual
from geometry.spectral_curve import Region, two_cut_geometry

router = APIRouter(
    prefix="/geometry",
    tags=["geometry"],
)

Precision = Annotated[PrecisionContext, Depends(get_precision_context)]


class GeometryRequest(BaseModel):
    """
    A point t of the parameter plane. Region classification traces trajectories and can be skipped.
    """
    t: ComplexValue = Field(examples=[{"re": "-3", "im": "0"}])
    classify: bool = Field(True, examples=[True])
    prec_bits: Optional[int] = Field(None, ge=64, examples=[128])


class TwoCutResponse(BaseModel):
    a2: ComplexValue
    b2: ComplexValue
    ell_star: ComplexValue
    region: Region = Field(examples=["O2"])
    cut_realization: str = Field(examples=["chords"])


class SurfaceResponse(BaseModel):
    """
    Periods and Abel images of the genus-one surface, with the two identities they satisfy.
    """
    B: ComplexValue
    alpha_norm: ComplexValue
    abel_zero0: ComplexValue
    abel_zero1: ComplexValue
    abel_inf0: ComplexValue
    abel_inf1: ComplexValue
    abel_zero_defect: str = Field(examples=["0.0"])
    theta_identity_residual: str = Field(examples=["3.1e-38"])


@router.post("/two-cut", response_model=TwoCutResponse)
def compute_two_cut(request: GeometryRequest, default_ctx: Precision):
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        geometry = two_cut_geometry(parse_complex(request.t, ctx), ctx, classify=request.classify)
        return TwoCutResponse(
            a2=ComplexValue.of(geometry.a2, ctx),
            b2=ComplexValue.of(geometry.b2, ctx),
            ell_star=ComplexValue.of(geometry.ell_star, ctx),
            region=geometry.region,
            cut_realization=geometry.cut_realization.value,
        )
    except Exception as e:
        raise_http(e, "build the two-cut geometry")


@router.post("/surface", response_model=SurfaceResponse)
def compute_surface(request: GeometryRequest, default_ctx: Precision):
    ctx = request_context(request.prec_bits, default_ctx)
    try:
        geometry = two_cut_geometry(parse_complex(request.t, ctx), ctx, classify=False)
        surface = surface_data(geometry, ctx)
        return SurfaceResponse(
            B=ComplexValue.of(surface.B, ctx),
            alpha_norm=ComplexValue.of(surface.alpha_norm, ctx),
            abel_zero0=ComplexValue.of(surface.abel_zero0, ctx),
            abel_zero1=ComplexValue.of(surface.abel_zero1, ctx),
            abel_inf0=ComplexValue.of(surface.abel_inf0, ctx),
            abel_inf1=ComplexValue.of(surface.abel_inf1, ctx),
            abel_zero_defect=ctx.mp.nstr(abel_zero_defect(surface, ctx), 5),
            theta_identity_residual=ctx.mp.nstr(theta_identity_residual(surface, ctx), 5),
        )
    except Exception as e:
        raise_http(e, "build the surface data")
