import logging

from api import geometry_endpoints, moment_endpoints, painleve_endpoints
from core.settings import DEFAULT_PREC_BITS, LOG_LEVEL, MAX_PREC_BITS

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

app = FastAPI(
    title="Quartic Lab API Service",
    description="High-precision moments, Hankel determinants, two-cut geometry and Painlevé-IV towers.",
)

origins = [
    "http://localhost",
    "http://localhost:5173",
    "http://localhost:8888",
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(moment_endpoints.router)
app.include_router(geometry_endpoints.router)
app.include_router(painleve_endpoints.router)

@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "service": "quartic-lab",
        "prec_bits": DEFAULT_PREC_BITS,
        "max_prec_bits": MAX_PREC_BITS,
    }
