"""Endpoint logic: submit tasks, wait for them, turn results into routes."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .. import qpe
from .. import statevector as sv
from ..cloud import (
    DEVICE_UNAVAILABLE,
    INSUFFICIENT_QUBITS,
    AnnealPayload,
    GatePayload,
    QuantumCloud,
    QuantumTask,
    TaskStatus,
)
from ..errors import DomainError, UnknownDeviceError
from ..graph import CostMatrix, canonical_tour, tour_cost
from ..qubo import decode_tour
from .schemas import TspResponse

ADIABATIC_DEVICES = ("dwave_dw2000", "dwave_advantage")
GATE_DEVICES = ("local", "tn1", "sv1", "ionq", "riggeti_aspen8", "riggeti_aspen9")


@dataclass
class ServiceError(Exception):
    http_status: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.http_status} {self.code}: {self.message}"


def _resolve(cloud: QuantumCloud, device: str | None, allowed: tuple[str, ...], endpoint: str):
    if not device or device not in allowed:
        raise ServiceError(404, "unknown_device", f"{device!r} is not a device of the {endpoint} endpoint")
    try:
        return cloud.device(device)
    except UnknownDeviceError:
        raise ServiceError(404, "unknown_device", f"{device!r} is not configured") from None


def _admission_error(task: QuantumTask, cloud: QuantumCloud, others: list[str]) -> ServiceError:
    for tid in others:
        cloud.cancel(tid, "sibling task rejected")
    if task.failure_reason == INSUFFICIENT_QUBITS:
        d = cloud.device(task.device)
        return ServiceError(
            413,
            "insufficient_qubits",
            f"{task.payload.requirement} qubits required, {task.device} offers {d.qubit_capacity}",
        )
    if task.failure_reason == DEVICE_UNAVAILABLE:
        return ServiceError(409, "device_unavailable", f"{task.device} is unavailable")
    return ServiceError(500, "internal", f"task {task.id} rejected: {task.failure_reason}")


def _wait_all(cloud: QuantumCloud, task_ids: list[str], deadline: float) -> list[QuantumTask]:
    done: list[QuantumTask] = []
    for i, tid in enumerate(task_ids):
        remaining = max(0.0, deadline - cloud.clock.now())
        task = cloud.poll(tid, remaining)
        if task.status is TaskStatus.CANCELLED:
            for other in task_ids[i + 1 :]:
                cloud.cancel(other, "sibling task timed out")
            raise ServiceError(
                504, "poll_timeout", f"task {tid} still pending after the poll timeout on {task.device}"
            )
        if task.status is not TaskStatus.COMPLETED:
            for other in task_ids[i + 1 :]:
                cloud.cancel(other, "sibling task failed")
            raise ServiceError(500, "internal", f"task {tid} failed: {task.failure_reason}")
        done.append(task)
    return done


def _total_cost(tasks: list[QuantumTask]) -> Decimal:
    return sum((t.receipt.total for t in tasks if t.receipt is not None), Decimal("0"))


def solve_adiabatic(
    cloud: QuantumCloud,
    matrix: CostMatrix,
    device: str | None,
    shots: int,
    poll_timeout: float,
) -> TspResponse:
    _resolve(cloud, device, ADIABATIC_DEVICES, "adiabatic")
    started = cloud.clock.now()
    task = cloud.submit(device, AnnealPayload(matrix), shots)
    if task.status is TaskStatus.FAILED:
        raise _admission_error(task, cloud, [])
    (task,) = _wait_all(cloud, [task.id], started + poll_timeout)
    result = cloud.fetch_result(task.id)
    for sample in result["samples"]:
        tour = decode_tour(matrix, [int(b) for b in sample["assignment"]])
        if tour is not None:
            break
    else:
        raise ServiceError(500, "internal", "annealer returned no feasible tour")
    return TspResponse(
        route=tour.as_list(),
        distance=tour_cost(matrix, tour),
        task_ids=[task.id],
        device=device,
        shots=shots,
        cost_estimate=_total_cost([task]),
        elapsed=cloud.clock.now() - started,
    )


def solve_gate(
    cloud: QuantumCloud,
    matrix: CostMatrix,
    device: str | None,
    shots: int,
    phase_bits: int,
    poll_timeout: float,
) -> tuple[TspResponse, qpe.GateTspResult]:
    _resolve(cloud, device, GATE_DEVICES, "gate")
    need = qpe.qubit_requirement(matrix.n, phase_bits)
    if matrix.n > qpe.MAX_EIGENSTATE_CITIES or need > sv.MAX_QUBITS:
        raise ServiceError(
            413, "insufficient_qubits", f"{need} qubits exceed the {sv.MAX_QUBITS}-qubit simulator limit"
        )
    try:
        enc = qpe.encode_phases(matrix, phase_bits)
    except DomainError as exc:
        raise ServiceError(400, "bad_matrix", str(exc)) from None
    eigenstates = qpe.enumerate_eigenstates(matrix)
    measured = tuple(qpe.phase_register(enc))

    started = cloud.clock.now()
    task_ids: list[str] = []
    for eig in eigenstates:
        payload = GatePayload(qpe.build_qpe_circuit(enc, eig), measured)
        task = cloud.submit(device, payload, shots)
        if task.status is TaskStatus.FAILED:
            raise _admission_error(task, cloud, task_ids)
        task_ids.append(task.id)

    tasks = _wait_all(cloud, task_ids, started + poll_timeout)
    estimates = []
    for eig, task in zip(eigenstates, tasks):
        counts = cloud.fetch_result(task.id)["counts"]
        estimates.append(qpe.estimate_from_counts(eig, sv.ShotResult(counts, shots), phase_bits))
    chosen = qpe.select_minimum(matrix, estimates)
    route = canonical_tour(chosen.tour.order, matrix.symmetric)
    response = TspResponse(
        route=route.as_list(),
        distance=None,
        task_ids=task_ids,
        device=device,
        shots=shots,
        cost_estimate=_total_cost(tasks),
        elapsed=cloud.clock.now() - started,
    )
    return response, chosen
