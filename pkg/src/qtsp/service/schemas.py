from __future__ import annotations

from decimal import Decimal
from typing import Literal, Optional

from pydantic import BaseModel, Field

ErrorCode = Literal[
    "bad_matrix",
    "unknown_device",
    "unknown_task",
    "device_unavailable",
    "insufficient_qubits",
    "poll_timeout",
    "internal",
]


class TspResponse(BaseModel):
    route: list[int]
    distance: Optional[float] = Field(
        None, description="Tour cost; only the adiabatic endpoint reports it."
    )
    task_ids: list[str]
    device: str
    shots: int
    cost_estimate: Decimal
    elapsed: float = Field(description="Virtual seconds from request to result.")


class ServiceErrorBody(BaseModel):
    http_status: int
    code: ErrorCode
    message: str


class TaskHistoryEntry(BaseModel):
    status: str
    at: float


class TaskDocument(BaseModel):
    id: str
    device: str
    status: str
    shots: int
    submitted_at: Optional[float]
    started_at: Optional[float]
    completed_at: Optional[float]
    failure_reason: Optional[str]
    result_key: Optional[str]
    cost: Optional[Decimal]
    history: list[TaskHistoryEntry]


class QueueDelayDocument(BaseModel):
    kind: str
    seconds: Optional[float] = None
    low: Optional[float] = None
    high: Optional[float] = None


class DeviceDocument(BaseModel):
    name: str
    paradigm: str
    qubit_capacity: Optional[int]
    available: bool
    queue_delay: QueueDelayDocument
    per_task_fee: Decimal
    per_shot_fee: Decimal
    readout_flip: float


class DeviceCatalog(BaseModel):
    devices: list[DeviceDocument]
