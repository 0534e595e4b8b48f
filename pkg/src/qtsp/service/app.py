"""HTTP front end for the two TSP solvers.

Both solve endpoints are synchronous: they submit tasks to the simulated
cloud, wait for them internally, and answer with the final route. FastAPI runs
the plain ``def`` handlers in its thread pool, so a request waiting on one
device queue does not block requests for other devices.
"""

from __future__ import annotations

import logging
from typing import Optional

from fastapi import FastAPI, File, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..cloud import QuantumCloud, VirtualClock, load_scenario
from ..errors import DomainError, FormatError, UnknownTaskError
from ..graph import parse_matrix
from ..qpe import DEFAULT_PHASE_BITS
from .schemas import DeviceCatalog, DeviceDocument, ServiceErrorBody, TaskDocument, TspResponse
from .settings import ServiceSettings
from .solver import ServiceError, solve_adiabatic, solve_gate

logger = logging.getLogger(__name__)

DEFAULT_SHOTS = 1000

_ERROR_RESPONSES = {
    status: {"model": ServiceErrorBody} for status in (400, 404, 409, 413, 500, 504)
}


def build_cloud(settings: ServiceSettings) -> QuantumCloud:
    scenario = load_scenario(settings.scenario_path)
    seed = scenario.seed if settings.seed is None else settings.seed
    scale = scenario.clock_scale if settings.clock_scale is None else settings.clock_scale
    return QuantumCloud(scenario.devices.values(), seed=seed, clock=VirtualClock(scale))


def _error(status: int, code: str, message: str) -> JSONResponse:
    body = ServiceErrorBody(http_status=status, code=code, message=message)
    return JSONResponse(status_code=status, content=body.model_dump())


def _read_matrix(matrix: Optional[UploadFile]):
    if matrix is None:
        raise ServiceError(400, "bad_matrix", "multipart field 'matrix' is required")
    raw = matrix.file.read()
    try:
        return parse_matrix(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise ServiceError(400, "bad_matrix", "matrix file is not UTF-8 text") from None
    except (FormatError, DomainError) as exc:
        raise ServiceError(400, "bad_matrix", str(exc)) from None


def create_app(settings: ServiceSettings | None = None, cloud: QuantumCloud | None = None) -> FastAPI:
    settings = settings or ServiceSettings.from_env()
    cloud = cloud or build_cloud(settings)

    app = FastAPI(title="Hybrid quantum TSP service", version="0.1.0")
    app.state.settings = settings
    app.state.cloud = cloud

    @app.exception_handler(ServiceError)
    async def _service_error(_: Request, exc: ServiceError) -> JSONResponse:
        return _error(exc.http_status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        details = "; ".join(
            f"{'.'.join(str(p) for p in e.get('loc', ()))}: {e.get('msg')}" for e in exc.errors()
        )
        return _error(400, "bad_matrix", f"invalid request: {details}")

    @app.exception_handler(Exception)
    async def _unexpected(_: Request, exc: Exception) -> JSONResponse:
        logger.exception("unhandled error")
        return _error(500, "internal", f"{type(exc).__name__}: {exc}")

    @app.post("/tsp/adiabatic", response_model=TspResponse, responses=_ERROR_RESPONSES)
    def tsp_adiabatic(
        device: Optional[str] = Query(None),
        shots: int = Query(DEFAULT_SHOTS, ge=1, le=1_000_000),
        matrix: Optional[UploadFile] = File(None),
    ) -> TspResponse:
        m = _read_matrix(matrix)
        return solve_adiabatic(cloud, m, device, shots, settings.poll_timeout)

    @app.post("/tsp/gate", response_model=TspResponse, responses=_ERROR_RESPONSES)
    def tsp_gate(
        device: Optional[str] = Query(None),
        shots: int = Query(DEFAULT_SHOTS, ge=1, le=1_000_000),
        phase_bits: int = Query(DEFAULT_PHASE_BITS, ge=1, le=16),
        matrix: Optional[UploadFile] = File(None),
    ) -> TspResponse:
        m = _read_matrix(matrix)
        response, _ = solve_gate(cloud, m, device, shots, phase_bits, settings.poll_timeout)
        return response

    @app.get("/tasks/{task_id}", response_model=TaskDocument, responses={404: {"model": ServiceErrorBody}})
    def get_task(task_id: str) -> TaskDocument:
        try:
            task = cloud.task(task_id)
        except UnknownTaskError:
            raise ServiceError(404, "unknown_task", f"no task {task_id!r}") from None
        return TaskDocument.model_validate(task.to_doc())

    @app.get("/devices", response_model=DeviceCatalog)
    def get_devices() -> DeviceCatalog:
        return DeviceCatalog(
            devices=[DeviceDocument.model_validate(d.to_doc()) for d in cloud.devices()]
        )

    return app
