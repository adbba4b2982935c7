"""FastAPI application exposing the solver pipeline.

Run with: uvicorn vnembed.service.app:app
"""

from __future__ import annotations

import logging
import os

from fastapi import FastAPI, HTTPException

from ..errors import BudgetExceededError, InstanceError, OrientationError, VnembedError
from . import handlers
from .schemas import (
    GenerateRequest,
    GenerateResponse,
    OracleRequest,
    OracleResponse,
    SolveRequest,
    SolveResponse,
    ValidateRequest,
    ValidateResponse,
    WidthsRequest,
    WidthsResponse,
)


def configure_logging() -> None:
    level = os.environ.get("VNEP_LOG", "error").lower()
    mapping = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=mapping.get(level, logging.ERROR))


configure_logging()

app = FastAPI(
    title="vnembed",
    description="Single-request virtual network embedding solver",
    version="0.1.0",
)


def _wrap(fn, payload):
    try:
        return fn(payload)
    except (InstanceError, OrientationError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except BudgetExceededError as exc:
        raise HTTPException(status_code=413, detail=str(exc)) from exc
    except VnembedError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/validate", response_model=ValidateResponse)
def validate(payload: ValidateRequest) -> ValidateResponse:
    return _wrap(handlers.handle_validate, payload)


@app.post("/widths", response_model=WidthsResponse)
def widths(payload: WidthsRequest) -> WidthsResponse:
    return _wrap(handlers.handle_widths, payload)


@app.post("/solve", response_model=SolveResponse)
def solve(payload: SolveRequest) -> SolveResponse:
    return _wrap(handlers.handle_solve, payload)


@app.post("/oracle", response_model=OracleResponse)
def oracle(payload: OracleRequest) -> OracleResponse:
    return _wrap(handlers.handle_oracle, payload)


@app.post("/generate", response_model=GenerateResponse)
def generate(payload: GenerateRequest) -> GenerateResponse:
    return _wrap(handlers.handle_generate, payload)
