import logging
from typing import Optional

from fastapi import HTTPException
from pydantic import BaseModel, Field

from core.errors import QuarticLabError
from core.precision import PrecisionComplex, PrecisionContext
from core.settings import context_for_request


class ComplexValue(BaseModel):
    """
    A complex number as a pair of decimal strings carrying the full working precision.
    """
    re: str = Field(examples=["-3.0"])
    im: str = Field(examples=["0.0"])

    @classmethod
    def of(cls, value, ctx: PrecisionContext) -> "ComplexValue":
        wrapped = value if isinstance(value, PrecisionComplex) else ctx.wrap(value)
        re, im = wrapped.as_strings()
        return cls(re=re, im=im)


class ModelRequest(BaseModel):
    """
    The parameters (t, N) of the quartic weight and an optional working precision.
    """
    t: ComplexValue = Field(examples=[{"re": "-3", "im": "0"}])
    N: float = Field(gt=0, examples=[20])
    prec_bits: Optional[int] = Field(None, ge=64, examples=[128])


def request_context(prec_bits: Optional[int], default: PrecisionContext) -> PrecisionContext:
    if prec_bits is None or prec_bits == default.prec_bits:
        return default
    try:
        return context_for_request(prec_bits)
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))


def parse_complex(value: ComplexValue, ctx: PrecisionContext):
    try:
        return ctx.mp.mpc(ctx.mp.mpf(value.re), ctx.mp.mpf(value.im))
    except (ValueError, TypeError) as e:
        raise HTTPException(status_code=422, detail=f"Not a decimal complex value: {value}: {e}")


def raise_http(e: Exception, action: str):
    """Numeric failures are the caller's problem (422); anything else is ours (500)."""
    if isinstance(e, HTTPException):
        raise e
    if isinstance(e, QuarticLabError):
        raise HTTPException(status_code=422, detail=f"{type(e).__name__}: {e}")
    if isinstance(e, ValueError):
        raise HTTPException(status_code=422, detail=str(e))
    logging.exception(f"Unexpected failure while trying to {action}")
    raise HTTPException(status_code=500, detail=f"Failed to {action}: {str(e)}")
