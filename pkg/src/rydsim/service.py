"""FastAPI service exposing the experiment runner.

Endpoints wrap the core package one to one: the protocol catalog, the
config-driven runner, and the pinned-number regression suite.  The CLI
is a thin client of this app (in-process by default, over the network
against a served instance).
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .protocols import protocol_catalog
from .regress import run_regression
from .runner import ConfigError, ExperimentConfig, NumericalError, RunOutput, run_experiment

app = FastAPI(title="rydsim", version=__version__)


class ParamModel(BaseModel):
    kind: str
    default: object = None
    help: str = ""


class ProtocolModel(BaseModel):
    name: str
    anchor: str
    description: str
    params: dict[str, ParamModel]
    metrics: list[str]


class ProtocolListResponse(BaseModel):
    protocols: list[ProtocolModel]


class RegressRequest(BaseModel):
    names: list[str] | None = None


class ErrorBody(BaseModel):
    code: str
    message: str


@app.exception_handler(ConfigError)
async def _config_error(_, exc: ConfigError):
    return JSONResponse(status_code=422,
                        content={"error": {"code": exc.code, "message": str(exc)}})


@app.exception_handler(NumericalError)
async def _numerical_error(_, exc: NumericalError):
    return JSONResponse(status_code=500,
                        content={"error": {"code": "numerical_failure",
                                           "message": str(exc)}})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/protocols", response_model=ProtocolListResponse)
def list_protocols() -> ProtocolListResponse:
    entries = []
    for info in protocol_catalog():
        entries.append(ProtocolModel(
            name=info.name,
            anchor=info.anchor,
            description=info.description,
            params={k: ParamModel(kind=v.kind, default=v.default, help=v.help)
                    for k, v in info.params.items()},
            metrics=list(info.metrics),
        ))
    return ProtocolListResponse(protocols=entries)


@app.post("/run", response_model=RunOutput)
def run(config: ExperimentConfig) -> RunOutput:
    return run_experiment(config)


@app.post("/regress")
def regress(request: RegressRequest | None = None) -> dict:
    names = request.names if request is not None else None
    return run_regression(names)
