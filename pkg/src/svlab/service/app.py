"""FastAPI application exposing the laboratory commands over HTTP.

Run with: uvicorn svlab.service.app:app  (or `svlab serve`).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    ConfigError,
    InsufficientDataError,
    InvalidParamsError,
    NonFiniteStateError,
    PriceCsvError,
    SvlabError,
)
from . import ops
from .schemas import (
    CorrelationsRequest,
    FitRequest,
    HealthResponse,
    PdfRequest,
    RunResponse,
    SimulateRequest,
)

app = FastAPI(
    title="svlab",
    description="Stochastic volatility model laboratory: simulate, estimate, calibrate.",
    version=__version__,
)


@app.exception_handler(SvlabError)
async def svlab_error_handler(_: Request, exc: SvlabError) -> JSONResponse:
    if isinstance(exc, NonFiniteStateError):
        kind, status = "non-finite-state", 409
    elif isinstance(exc, (ConfigError, PriceCsvError)):
        kind, status = "config", 422
    elif isinstance(exc, (InvalidParamsError, InsufficientDataError)):
        kind, status = "invalid-params", 422
    else:
        kind, status = "error", 422
    return JSONResponse(status_code=status, content={"detail": str(exc), "kind": kind})


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/simulate", response_model=RunResponse)
def simulate(req: SimulateRequest) -> RunResponse:
    return ops.run_simulate(req)


@app.post("/pdf", response_model=RunResponse)
def pdf(req: PdfRequest) -> RunResponse:
    return ops.run_pdf(req)


@app.post("/correlations", response_model=RunResponse)
def correlations(req: CorrelationsRequest) -> RunResponse:
    return ops.run_correlations(req)


@app.post("/fit", response_model=RunResponse)
def fit(req: FitRequest) -> RunResponse:
    return ops.run_fit(req)
