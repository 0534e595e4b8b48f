"""Simulated quantum cloud: device catalog, task lifecycle, results and billing."""

from .clock import VirtualClock
from .devices import PAPER_DEVICES, DeviceProfile, QueueDelay, Scenario, load_scenario
from .payloads import AnnealPayload, GatePayload
from .registry import (
    DEVICE_UNAVAILABLE,
    INSUFFICIENT_QUBITS,
    POLL_TIMEOUT,
    QuantumCloud,
    register_scenario,
)
from .tasks import ALLOWED_TRANSITIONS, CostReceipt, ObjectStore, QuantumTask, TaskStatus

__all__ = [
    "ALLOWED_TRANSITIONS",
    "AnnealPayload",
    "CostReceipt",
    "DEVICE_UNAVAILABLE",
    "DeviceProfile",
    "GatePayload",
    "INSUFFICIENT_QUBITS",
    "ObjectStore",
    "PAPER_DEVICES",
    "POLL_TIMEOUT",
    "QuantumCloud",
    "QuantumTask",
    "QueueDelay",
    "Scenario",
    "TaskStatus",
    "VirtualClock",
    "load_scenario",
    "register_scenario",
]
