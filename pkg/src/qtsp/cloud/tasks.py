"""Task records, the lifecycle state machine, the object store and receipts."""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any

from ..errors import DuplicateObjectError, MissingObjectError


class TaskStatus(str, enum.Enum):
    CREATED = "CREATED"
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    CANCELLED = "CANCELLED"
    FAILED = "FAILED"

    @property
    def terminal(self) -> bool:
        return self in (TaskStatus.COMPLETED, TaskStatus.CANCELLED, TaskStatus.FAILED)


# CREATED -> FAILED is the admission rejection (capacity / availability).
ALLOWED_TRANSITIONS: frozenset[tuple[TaskStatus, TaskStatus]] = frozenset(
    {
        (TaskStatus.CREATED, TaskStatus.QUEUED),
        (TaskStatus.CREATED, TaskStatus.FAILED),
        (TaskStatus.QUEUED, TaskStatus.RUNNING),
        (TaskStatus.RUNNING, TaskStatus.COMPLETED),
        (TaskStatus.RUNNING, TaskStatus.FAILED),
        (TaskStatus.CREATED, TaskStatus.CANCELLED),
        (TaskStatus.QUEUED, TaskStatus.CANCELLED),
        (TaskStatus.RUNNING, TaskStatus.CANCELLED),
    }
)


class IllegalTransition(RuntimeError):
    pass


@dataclass(frozen=True)
class CostReceipt:
    task_fee: Decimal
    shot_fee_total: Decimal
    total: Decimal

    @classmethod
    def of(cls, per_task_fee: Decimal, per_shot_fee: Decimal, shots: int) -> "CostReceipt":
        shot_total = per_shot_fee * shots
        return cls(per_task_fee, shot_total, per_task_fee + shot_total)


@dataclass
class QuantumTask:
    id: str
    device: str
    shots: int
    payload: Any
    status: TaskStatus = TaskStatus.CREATED
    submitted_at: float | None = None
    started_at: float | None = None
    completed_at: float | None = None
    failure_reason: str | None = None
    result_key: str | None = None
    receipt: CostReceipt | None = None
    history: list[tuple[str, float]] = field(default_factory=list)

    def transition(self, new: TaskStatus, at: float) -> None:
        if (self.status, new) not in ALLOWED_TRANSITIONS:
            raise IllegalTransition(f"task {self.id}: {self.status.value} -> {new.value}")
        self.status = new
        self.history.append((new.value, at))

    def snapshot(self) -> "QuantumTask":
        return QuantumTask(
            self.id,
            self.device,
            self.shots,
            self.payload,
            self.status,
            self.submitted_at,
            self.started_at,
            self.completed_at,
            self.failure_reason,
            self.result_key,
            self.receipt,
            list(self.history),
        )

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "device": self.device,
            "status": self.status.value,
            "shots": self.shots,
            "submitted_at": self.submitted_at,
            "started_at": self.started_at,
            "completed_at": self.completed_at,
            "failure_reason": self.failure_reason,
            "result_key": self.result_key,
            "cost": str(self.receipt.total) if self.receipt else None,
            "history": [{"status": s, "at": t} for s, t in self.history],
        }


class ObjectStore:
    """In-memory, write-once key/blob store standing in for a result bucket."""

    def __init__(self) -> None:
        self._blobs: dict[str, bytes] = {}
        self._lock = threading.Lock()

    def put(self, key: str, blob: bytes) -> None:
        with self._lock:
            if key in self._blobs:
                raise DuplicateObjectError(f"object {key!r} already exists")
            self._blobs[key] = bytes(blob)

    def get(self, key: str) -> bytes:
        with self._lock:
            try:
                return self._blobs[key]
            except KeyError:
                raise MissingObjectError(key) from None

    def get_json(self, key: str) -> dict[str, Any]:
        return json.loads(self.get(key))

    def __contains__(self, key: object) -> bool:
        with self._lock:
            return key in self._blobs

    def keys(self) -> list[str]:
        with self._lock:
            return sorted(self._blobs)

    def snapshot(self, directory: str | Path) -> int:
        """Write every object below ``directory``; returns the object count."""
        root = Path(directory)
        with self._lock:
            items = list(self._blobs.items())
        for key, blob in items:
            path = root / key
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(blob)
        return len(items)
