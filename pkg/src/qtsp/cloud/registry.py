"""The simulated quantum cloud: devices, queues, scheduling and accounting.

Scheduling is a discrete-event simulation over :class:`VirtualClock`. Each
device serves its queue in FIFO order, one task at a time. A queued task may
start once its sampled queue delay has elapsed and the device is idle.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import random
import threading
import uuid
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ..errors import UnknownDeviceError, UnknownTaskError
from ..qpe import derive_seed
from .clock import VirtualClock
from .devices import DeviceProfile, Scenario, load_scenario
from .tasks import CostReceipt, ObjectStore, QuantumTask, TaskStatus

logger = logging.getLogger(__name__)

INSUFFICIENT_QUBITS = "insufficient qubits"
DEVICE_UNAVAILABLE = "device unavailable"
POLL_TIMEOUT = "poll timeout"


@dataclass
class _DeviceState:
    queue: deque = field(default_factory=deque)
    running: str | None = None
    running_until: float = 0.0
    idle_from: float = 0.0


class QuantumCloud:
    """Device registry plus task table, result store and receipts.

    All public methods are thread-safe; each runs under one re-entrant lock so
    concurrent callers observe a single global order of operations.
    """

    def __init__(
        self,
        devices: Iterable[DeviceProfile],
        *,
        seed: int = 0,
        clock: VirtualClock | None = None,
    ):
        self._devices: dict[str, DeviceProfile] = {}
        for d in devices:
            self._devices[d.name] = d
        self._state = {name: _DeviceState() for name in self._devices}
        self.clock = clock or VirtualClock()
        self.store = ObjectStore()
        self.seed = seed
        self._tasks: dict[str, QuantumTask] = {}
        self._eligible_at: dict[str, float] = {}
        self._pending_results: dict[str, dict[str, Any]] = {}
        self._sequence = 0
        self._delay_rng = np.random.default_rng(seed)
        self._id_rng = random.Random(seed)
        self._lock = threading.RLock()

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "QuantumCloud":
        return cls(scenario.devices.values(), seed=scenario.seed, clock=VirtualClock(scenario.clock_scale))

    # -- catalog ---------------------------------------------------------

    def devices(self) -> list[DeviceProfile]:
        with self._lock:
            return list(self._devices.values())

    def device(self, name: str) -> DeviceProfile:
        with self._lock:
            try:
                return self._devices[name]
            except KeyError:
                raise UnknownDeviceError(name) from None

    def update_device(self, name: str, **changes: Any) -> DeviceProfile:
        with self._lock:
            profile = dataclasses.replace(self.device(name), **changes)
            self._devices[name] = profile
            return profile

    def price(self, device_name: str, shots: int) -> CostReceipt:
        d = self.device(device_name)
        return CostReceipt.of(d.per_task_fee, d.per_shot_fee, shots)

    # -- tasks -----------------------------------------------------------

    def task(self, task_id: str) -> QuantumTask:
        with self._lock:
            return self._get(task_id).snapshot()

    def tasks(self) -> list[QuantumTask]:
        with self._lock:
            return [t.snapshot() for t in self._tasks.values()]

    def receipts(self) -> dict[str, CostReceipt]:
        with self._lock:
            return {t.id: t.receipt for t in self._tasks.values() if t.receipt is not None}

    def _get(self, task_id: str) -> QuantumTask:
        try:
            return self._tasks[task_id]
        except KeyError:
            raise UnknownTaskError(task_id) from None

    def submit(self, device_name: str, payload: Any, shots: int) -> QuantumTask:
        """Create a task and admit it to the device queue.

        Admission failures (device offline, payload too large, wrong paradigm)
        leave the task FAILED immediately and cost nothing.
        """
        if shots < 1:
            raise ValueError("shots must be >= 1")
        with self._lock:
            profile = self.device(device_name)
            now = self.clock.now()
            task_id = str(uuid.UUID(int=self._id_rng.getrandbits(128), version=4))
            task = QuantumTask(task_id, device_name, shots, payload, submitted_at=now)
            task.history.append((TaskStatus.CREATED.value, now))
            self._tasks[task_id] = task
            self._eligible_at[task_id] = math.inf
            self._sequence += 1
            task_seed = derive_seed(self.seed, self._sequence)
            self._pending_results[task_id] = {"seed": task_seed}

            reason = None
            if not profile.available:
                reason = DEVICE_UNAVAILABLE
            elif profile.is_gate != (payload.paradigm == "gate"):
                reason = f"device {device_name} does not accept {payload.paradigm} payloads"
            elif not profile.fits(payload.requirement):
                reason = INSUFFICIENT_QUBITS
            if reason is not None:
                task.failure_reason = reason
                task.completed_at = now
                task.transition(TaskStatus.FAILED, now)
                logger.info("task %s rejected on %s: %s", task_id, device_name, reason)
                return task.snapshot()

            task.transition(TaskStatus.QUEUED, now)
            state = self._state[device_name]
            state.queue.append(task_id)
            if profile.bypass_queue:
                self._eligible_at[task_id] = now
                self._run_due(until=now, only_device=device_name)
            else:
                self._eligible_at[task_id] = now + profile.queue_delay.sample(self._delay_rng)
            return task.snapshot()

    def cancel(self, task_id: str, reason: str = "cancelled by caller") -> QuantumTask:
        with self._lock:
            task = self._get(task_id)
            if not task.status.terminal:
                self._cancel(task, reason)
            return task.snapshot()

    def _cancel(self, task: QuantumTask, reason: str) -> None:
        now = self.clock.now()
        state = self._state[task.device]
        if task.status is TaskStatus.QUEUED:
            state.queue.remove(task.id)
        elif task.status is TaskStatus.RUNNING:
            state.running = None
            state.idle_from = now
            self._pending_results.pop(task.id, None)
        task.failure_reason = reason
        task.completed_at = now
        task.transition(TaskStatus.CANCELLED, now)

    # -- scheduling ------------------------------------------------------

    def _next_event(self, only_device: str | None = None) -> tuple[float, str] | None:
        best: tuple[float, str] | None = None
        for name, state in self._state.items():
            if only_device is not None and name != only_device:
                continue
            if state.running is not None:
                t = state.running_until
            elif state.queue:
                t = max(self._eligible_at[state.queue[0]], state.idle_from)
            else:
                continue
            if best is None or t < best[0]:
                best = (t, name)
        return best

    def next_event_time(self) -> float:
        with self._lock:
            ev = self._next_event()
            return math.inf if ev is None else ev[0]

    def _run_due(self, until: float, only_device: str | None = None) -> list[QuantumTask]:
        touched: list[QuantumTask] = []
        while True:
            ev = self._next_event(only_device)
            if ev is None or ev[0] > until:
                break
            t, name = ev
            self.clock.advance_to(t)
            state = self._state[name]
            if state.running is not None:
                touched.append(self._finish(self._tasks[state.running], t))
            else:
                touched.append(self._start(self._tasks[state.queue.popleft()], t))
        self.clock.advance_to(until)
        return touched

    def _start(self, task: QuantumTask, t: float) -> QuantumTask:
        profile = self._devices[task.device]
        state = self._state[task.device]
        task.started_at = t
        task.transition(TaskStatus.RUNNING, t)
        seed = self._pending_results[task.id]["seed"]
        try:
            body = task.payload.execute(
                task.shots,
                seed=seed,
                readout_flip=profile.readout_flip,
                anneal_sweeps=profile.anneal_sweeps,
            )
        except Exception as exc:  # executor failure is data, not a crash
            logger.exception("task %s failed on %s", task.id, task.device)
            task.failure_reason = f"executor error: {exc}"
            task.completed_at = t
            task.receipt = CostReceipt.of(profile.per_task_fee, profile.per_shot_fee, task.shots)
            task.transition(TaskStatus.FAILED, t)
            state.idle_from = t
            self._pending_results.pop(task.id, None)
            return task
        self._pending_results[task.id] = body
        state.running = task.id
        state.running_until = t + profile.execution_seconds
        if profile.execution_seconds == 0:
            return self._finish(task, t)
        return task

    def _finish(self, task: QuantumTask, t: float) -> QuantumTask:
        profile = self._devices[task.device]
        state = self._state[task.device]
        state.running = None
        state.idle_from = t
        body = self._pending_results.pop(task.id)
        task.completed_at = t
        doc = {
            "task_id": task.id,
            "device": task.device,
            "shots": task.shots,
            "submitted_at": task.submitted_at,
            "started_at": task.started_at,
            "completed_at": t,
            **body,
        }
        key = f"results/{task.device}/{task.id}.json"
        self.store.put(key, json.dumps(doc, sort_keys=True).encode("utf-8"))
        task.result_key = key
        task.receipt = CostReceipt.of(profile.per_task_fee, profile.per_shot_fee, task.shots)
        task.transition(TaskStatus.COMPLETED, t)
        return task

    def execute_pending(self, until: float | None = None) -> list[QuantumTask]:
        """Advance the clock to ``until`` (default: now), starting and finishing
        every task whose time has come, in time order."""
        with self._lock:
            horizon = self.clock.now() if until is None else until
            return [t.snapshot() for t in self._run_due(horizon)]

    def poll(self, task_id: str, timeout: float) -> QuantumTask:
        """Wait until the task is terminal or ``timeout`` virtual seconds pass.

        A task still pending at the deadline is cancelled.
        """
        if timeout < 0 or math.isnan(timeout):
            raise ValueError("timeout must be non-negative")
        with self._lock:
            self._get(task_id)
            deadline = self.clock.now() + timeout
        while True:
            with self._lock:
                task = self._get(task_id)
                if task.status.terminal:
                    return task.snapshot()
                now = self.clock.now()
                if now >= deadline:
                    self._cancel(task, POLL_TIMEOUT)
                    return task.snapshot()
                target = min(self.next_event_time(), deadline)
            # wait outside the lock so other requests keep making progress
            self.clock.wait(target - now)
            with self._lock:
                self._run_due(target)

    def fetch_result(self, task_id: str) -> dict[str, Any]:
        with self._lock:
            task = self._get(task_id)
            if task.result_key is None:
                raise UnknownTaskError(f"task {task_id} has no stored result ({task.status.value})")
            key = task.result_key
        return self.store.get_json(key)


def register_scenario(config: Any = None) -> QuantumCloud:
    """Build a cloud from the bundled paper scenario plus ``config`` overrides."""
    return QuantumCloud.from_scenario(load_scenario(config))
