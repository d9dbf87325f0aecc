"""HTTP service exposing theory, simulation, spectrum, and validation.

Endpoints delegate to the same evaluate_* functions the local sweep runner
uses, so a sweep produces identical numbers whether it talks to a remote
server or computes in-process.  Values that are infinite in the zero-ridge
closed forms are encoded as JSON null.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import DimensionOverflow, RlfeatError
from ..model import ModelConfig, config_from_snr
from ..sweep import (
    evaluate_simulate,
    evaluate_spectrum,
    evaluate_theory,
    evaluate_validate,
)
from . import schemas


def _config(req: schemas.PointRequest) -> ModelConfig:
    return config_from_snr(
        req.alpha_f,
        req.alpha_p,
        snr=req.snr,
        teacher=req.teacher,
        m=req.m,
        lam=req.lam,
    )


def _nullable(quantities):
    """Map non-finite quantity values to None for JSON transport."""
    return {
        name: (value if math.isfinite(value) else None)
        for name, value in quantities.items()
    }


def create_app() -> FastAPI:
    app = FastAPI(title="rlfeat", version=__version__)

    @app.exception_handler(RlfeatError)
    def _domain_error(request: Request, exc: RlfeatError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(DimensionOverflow)
    def _too_large(request: Request, exc: DimensionOverflow):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    def _bad_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/theory", response_model=schemas.TheoryResponse)
    def theory(req: schemas.PointRequest):
        point = evaluate_theory(_config(req))
        point["ridgeless"] = _nullable(point["ridgeless"])
        point["finite_lambda"] = _nullable(point["finite_lambda"])
        return schemas.TheoryResponse(**point)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        point = evaluate_simulate(_config(req), req.trials, req.seed)
        point["theory"] = _nullable(point["theory"])
        return schemas.SimulateResponse(**point)

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.SimulateRequest):
        point = evaluate_validate(_config(req), req.trials, req.seed)
        point["theory"] = _nullable(point["theory"])
        return schemas.ValidateResponse(**point)

    @app.post("/spectrum", response_model=schemas.SpectrumResponse)
    def spectrum(req: schemas.SpectrumRequest):
        point = evaluate_spectrum(_config(req), n_points=req.n_points)
        return schemas.SpectrumResponse(**point)

    return app


app = create_app()
