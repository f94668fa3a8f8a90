"""Pydantic request/response models for the HTTP service.

These are the wire contract shared by the FastAPI routes and the CLI thin
client; every request maps onto the core dataclasses via to_core helpers.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..config import RunConfig
from ..models import ModelKind, ModelParams

_DEFAULT_M = {"vasicek": 0.2, "heston": 0.04, "expou": 0.0}


class ModelParamsModel(BaseModel):
    kind: Literal["vasicek", "heston", "expou"]
    alpha: float
    k: float
    m: Optional[float] = None
    rho: float = 0.0
    mu: float = 0.0
    y0: Optional[float] = None
    s0: float = 100.0

    def to_core(self) -> ModelParams:
        m = self.m if self.m is not None else _DEFAULT_M[self.kind]
        y0 = self.y0
        if y0 is None:
            y0 = 0.0 if self.kind == "expou" else m
        return ModelParams(
            kind=ModelKind(self.kind),
            alpha=self.alpha,
            m=m,
            k=self.k,
            rho=self.rho,
            mu=self.mu,
            y0=y0,
            s0=self.s0,
        )

    @classmethod
    def from_core(cls, params: ModelParams) -> "ModelParamsModel":
        return cls(
            kind=params.kind.value,
            alpha=params.alpha,
            k=params.k,
            m=params.m,
            rho=params.rho,
            mu=params.mu,
            y0=params.y0,
            s0=params.s0,
        )


class SimulationModel(BaseModel):
    dt: float
    n_steps: int
    n_paths: int = 1
    seed: int = 0
    record_stride: int = 1


class SimulateRequest(BaseModel):
    model: ModelParamsModel
    simulation: SimulationModel
    format: Literal["csv", "binary"] = "csv"


class PdfRequest(BaseModel):
    model: ModelParamsModel
    horizons: list[float] = Field(min_length=1)
    n_paths: int = 20_000
    seed: int = 0
    dt: Optional[float] = None
    method: Literal["histogram", "cf"] = "histogram"


class CorrelationsRequest(BaseModel):
    model: ModelParamsModel
    years: int = 100
    dt: float = 1.0
    seed: int = 0
    max_lag: int = 40
    n_boot: int = 200
    block_len: Optional[int] = None


class FitRequest(BaseModel):
    csv_text: str
    what: Literal["vol", "ret", "horizons"]
    horizons: list[int] = Field(default_factory=lambda: [1, 5, 20], min_length=1)
    symbol: str = ""


class FilePayload(BaseModel):
    name: str
    kind: Literal["text", "binary"]
    text: Optional[str] = None
    b64: Optional[str] = None


class RunResponse(BaseModel):
    files: list[FilePayload]
    manifest: dict
    warnings: list[str] = []
    results: Optional[list[dict]] = None


class HealthResponse(BaseModel):
    status: str
    version: str


def simulate_request_from_config(cfg: RunConfig) -> SimulateRequest:
    return SimulateRequest(
        model=ModelParamsModel.from_core(cfg.params),
        simulation=SimulationModel(
            dt=cfg.dt,
            n_steps=cfg.n_steps,
            n_paths=cfg.n_paths,
            seed=cfg.seed,
            record_stride=cfg.record_stride,
        ),
        format=cfg.format,
    )


def pdf_request_from_config(cfg: RunConfig, horizons: list[float] | None = None) -> PdfRequest:
    return PdfRequest(
        model=ModelParamsModel.from_core(cfg.params),
        horizons=list(horizons or cfg.horizons),
        n_paths=cfg.pdf_paths,
        seed=cfg.seed,
        dt=None,
        method=cfg.pdf_method,
    )


def correlations_request_from_config(cfg: RunConfig) -> CorrelationsRequest:
    return CorrelationsRequest(
        model=ModelParamsModel.from_core(cfg.params),
        years=cfg.years,
        dt=cfg.dt,
        seed=cfg.seed,
        max_lag=cfg.max_lag,
        n_boot=cfg.n_boot,
        block_len=cfg.block_len,
    )
