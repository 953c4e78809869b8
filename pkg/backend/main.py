from __future__ import annotations

import logging
import os
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from thetastrat import __version__
from thetastrat.cli import RunOptions, run
from thetastrat.config import SCHEMA_VERSION, Command, RunConfig, environment_default
from thetastrat.errors import ConfigError, IntegerGateError, MathPreconditionError, error_kind

logger = logging.getLogger("thetastrat.backend")

fastapi_app = FastAPI(title="thetastrat", version=__version__)


@fastapi_app.exception_handler(RequestValidationError)
async def request_validation_error_handler(
    _request: Request,
    exc: RequestValidationError,
) -> JSONResponse:
    """Return validation details without echoing the submitted configuration."""
    return JSONResponse(
        status_code=422,
        content={
            "detail": [
                {
                    key: value
                    for key, value in error.items()
                    if key not in {"ctx", "input", "url"}
                }
                for error in exc.errors()
            ]
        },
    )


@fastapi_app.exception_handler(MathPreconditionError)
@fastapi_app.exception_handler(IntegerGateError)
async def math_error_handler(_request: Request, exc: Exception) -> JSONResponse:
    logger.info("Run rejected (%s): %s", error_kind(exc), exc)
    return JSONResponse(status_code=409, content={"detail": str(exc), "kind": error_kind(exc)})


@fastapi_app.exception_handler(ConfigError)
async def config_error_handler(_request: Request, exc: ConfigError) -> JSONResponse:
    return JSONResponse(status_code=422, content={"detail": str(exc), "kind": error_kind(exc)})


allowed_origins = [
    origin.strip()
    for origin in os.environ.get("THETASTRAT_ALLOWED_ORIGINS", "").split(",")
    if origin.strip()
]
if allowed_origins:
    fastapi_app.add_middleware(
        CORSMiddleware,
        allow_origins=allowed_origins,
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["Content-Type"],
    )


@fastapi_app.get("/api/health")
async def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__, "schema": SCHEMA_VERSION}


@fastapi_app.post("/api/run/{command}")
def run_command(command: str, config: RunConfig | None = Body(default=None)) -> dict[str, Any]:
    try:
        selected = Command(command)
    except ValueError:
        raise HTTPException(status_code=404, detail=f"Unknown command '{command}'.") from None
    if config is None and selected is not Command.CHECK:
        raise HTTPException(status_code=422, detail=f"The {selected.value} command needs a run configuration.")
    options = RunOptions(
        seed=config.seed if config is not None else environment_default("THETASTRAT_SEED", RunConfig.model_fields["seed"].default),
        precision=config.precision if config is not None else environment_default(
            "THETASTRAT_PRECISION", RunConfig.model_fields["precision"].default
        ),
    )
    logger.info("Running %s", selected.value)
    return run(config, selected, options)


app = fastapi_app
