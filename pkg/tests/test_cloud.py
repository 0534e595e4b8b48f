import json
import random
from decimal import Decimal

import numpy as np
import pytest

from qtsp import statevector as sv
from qtsp.cloud import (
    ALLOWED_TRANSITIONS,
    AnnealPayload,
    CostReceipt,
    DeviceProfile,
    GatePayload,
    ObjectStore,
    QuantumCloud,
    QueueDelay,
    TaskStatus,
    VirtualClock,
    load_scenario,
    register_scenario,
)
from qtsp.cloud.tasks import IllegalTransition, QuantumTask
from qtsp.errors import ConfigError, DuplicateObjectError, MissingObjectError, UnknownDeviceError, UnknownTaskError
from qtsp.graph import M_STAR, CostMatrix

TINY_GATE = GatePayload(sv.Circuit(1, [sv.H(0)]), (0,))
TINY_ANNEAL = AnnealPayload(CostMatrix.from_array([[0, 1], [1, 0]]))


def gate_payload(qubits):
    return GatePayload(sv.Circuit(qubits, [sv.X(0)]), (0,))


class BoomPayload:
    paradigm = "gate"
    requirement = 1

    def execute(self, shots, seed, **_):
        raise RuntimeError("detector on fire")


class TestScenario:
    def test_defaults(self):
        s = load_scenario()
        assert list(s.devices) == [
            "local", "sv1", "tn1", "ionq", "riggeti_aspen8", "riggeti_aspen9", "dwave_dw2000", "dwave_advantage",
        ]
        assert s.devices["ionq"].qubit_capacity == 11
        assert not s.devices["riggeti_aspen8"].available
        assert not s.devices["tn1"].available
        assert s.devices["riggeti_aspen9"].queue_delay.kind == "unbounded"
        assert s.devices["dwave_dw2000"].queue_delay == QueueDelay.fixed(21)

    def test_empty_override(self):
        assert load_scenario({}) == load_scenario()

    def test_partial_override(self):
        s = load_scenario({"devices": [{"name": "ionq", "qubit_capacity": 32}]})
        assert s.devices["ionq"].qubit_capacity == 32
        assert s.devices["ionq"].per_shot_fee == Decimal("0.01")

    def test_yaml_file(self, tmp_path):
        p = tmp_path / "s.yaml"
        p.write_text("seed: 5\ndevices:\n  - {name: tn1, available: true}\n")
        s = load_scenario(p)
        assert s.seed == 5 and s.devices["tn1"].available

    @pytest.mark.parametrize(
        "doc",
        [
            {"devices": [{"name": "ionq"}, {"name": "ionq"}]},
            {"devices": [{"name": "dwave_3000"}]},
            {"devices": [{"name": "ionq", "colour": "red"}]},
            {"devices": [{"name": "ionq", "readout_flip": 0.7}]},
            {"devices": [{"name": "ionq", "per_task_fee": "-1"}]},
            {"devices": [{"name": "ionq", "queue_delay": {"kind": "uniform", "low": 5, "high": 1}}]},
            {"clock_speed": 2},
        ],
        ids=["duplicate", "unknown", "field", "flip", "fee", "delay", "key"],
    )
    def test_config_errors(self, doc):
        with pytest.raises(ConfigError):
            load_scenario(doc)

    def test_profile_doc_round_trip(self):
        d = load_scenario().devices["sv1"]
        assert QueueDelay.from_doc(d.to_doc()["queue_delay"]) == d.queue_delay


class TestSubmit:
    def test_capacity_rejection(self):
        cloud = register_scenario()
        task = cloud.submit("ionq", gate_payload(14), 1000)
        assert task.status is TaskStatus.FAILED
        assert task.failure_reason == "insufficient qubits"
        assert [s for s, _ in task.history] == ["CREATED", "FAILED"]
        assert task.receipt is None

    def test_unavailable(self):
        cloud = register_scenario()
        task = cloud.submit("riggeti_aspen8", TINY_GATE, 10)
        assert task.failure_reason == "device unavailable"

    def test_local_runs_at_once(self):
        cloud = register_scenario()
        task = cloud.submit("local", gate_payload(14), 10)
        assert task.status is TaskStatus.COMPLETED
        assert task.result_key in cloud.store

    def test_queued(self):
        cloud = register_scenario()
        assert cloud.submit("sv1", gate_payload(14), 10).status is TaskStatus.QUEUED

    def test_paradigm_mismatch(self):
        cloud = register_scenario()
        task = cloud.submit("dwave_dw2000", TINY_GATE, 10)
        assert task.status is TaskStatus.FAILED

    def test_unknown_device_creates_nothing(self):
        cloud = register_scenario()
        with pytest.raises(UnknownDeviceError):
            cloud.submit("nope", TINY_GATE, 1)
        assert cloud.tasks() == []

    def test_annealer_capacity(self):
        cloud = register_scenario()
        big = AnnealPayload(CostMatrix.from_array(np.ones((46, 46)) - np.eye(46)))
        assert cloud.submit("dwave_dw2000", big, 1).failure_reason == "insufficient qubits"

    def test_bad_shots(self):
        with pytest.raises(ValueError):
            register_scenario().submit("local", TINY_GATE, 0)


class TestPoll:
    def test_unbounded_queue_times_out(self):
        cloud = register_scenario()
        task = cloud.submit("riggeti_aspen9", gate_payload(14), 1000)
        out = cloud.poll(task.id, 300)
        assert out.status is TaskStatus.CANCELLED
        assert out.failure_reason == "poll timeout"
        assert cloud.clock.now() == 300
        assert out.result_key is None

    def test_local_no_wait(self):
        cloud = register_scenario()
        task = cloud.submit("local", TINY_GATE, 5)
        assert cloud.poll(task.id, 300).status is TaskStatus.COMPLETED
        assert cloud.clock.now() == 0

    def test_completed_returns_at_once(self):
        cloud = register_scenario()
        t = cloud.submit("dwave_dw2000", TINY_ANNEAL, 5)
        cloud.poll(t.id, 300)
        now = cloud.clock.now()
        cloud.poll(t.id, 1000)
        assert cloud.clock.now() == now

    def test_unknown(self):
        with pytest.raises(UnknownTaskError):
            register_scenario().poll("missing", 1)

    def test_negative_timeout(self):
        cloud = register_scenario()
        t = cloud.submit("sv1", TINY_GATE, 1)
        with pytest.raises(ValueError):
            cloud.poll(t.id, -1)


class TestScheduling:
    def test_fixed_delay(self):
        cloud = register_scenario()
        t = cloud.poll(cloud.submit("dwave_dw2000", AnnealPayload(M_STAR), 10).id, 300)
        assert t.started_at - t.submitted_at == 21

    def test_fifo_with_execution_time(self):
        cloud = register_scenario()
        cloud.update_device("sv1", execution_seconds=5.0)
        a = cloud.submit("sv1", TINY_GATE, 1)
        b = cloud.submit("sv1", TINY_GATE, 1)
        c = cloud.submit("sv1", TINY_GATE, 1)
        cloud.execute_pending(until=1000)
        a, b, c = (cloud.task(x.id) for x in (a, b, c))
        assert a.started_at < b.started_at < c.started_at
        assert b.started_at >= a.completed_at
        assert c.started_at >= b.completed_at
        assert a.completed_at - a.started_at == 5

    def test_running_then_cancelled_frees_device(self):
        cloud = register_scenario()
        cloud.update_device("dwave_advantage", execution_seconds=100.0)
        a = cloud.submit("dwave_advantage", TINY_ANNEAL, 1)
        b = cloud.submit("dwave_advantage", TINY_ANNEAL, 1)
        cloud.execute_pending(until=30)
        assert cloud.task(a.id).status is TaskStatus.RUNNING
        cloud.cancel(a.id)
        cloud.execute_pending(until=200)
        assert cloud.task(b.id).status is TaskStatus.COMPLETED
        assert cloud.task(a.id).receipt is None

    def test_result_document(self):
        cloud = register_scenario()
        t = cloud.poll(cloud.submit("dwave_advantage", AnnealPayload(M_STAR), 20).id, 300)
        doc = json.loads(cloud.store.get(t.result_key))
        assert doc["kind"] == "samples"
        assert doc["device"] == "dwave_advantage" and doc["shots"] == 20
        assert sum(s["occurrences"] for s in doc["samples"]) == 20
        assert doc["started_at"] == 25.0

    def test_executor_failure(self):
        cloud = register_scenario()
        t = cloud.poll(cloud.submit("sv1", BoomPayload(), 10).id, 300)
        assert t.status is TaskStatus.FAILED
        assert "detector on fire" in t.failure_reason
        assert t.receipt == cloud.price("sv1", 10)
        assert [s for s, _ in t.history] == ["CREATED", "QUEUED", "RUNNING", "FAILED"]

    def test_cancel_terminal_is_noop(self):
        cloud = register_scenario()
        t = cloud.submit("local", TINY_GATE, 1)
        assert cloud.cancel(t.id).status is TaskStatus.COMPLETED

    def test_readout_flip_applied(self):
        cloud = register_scenario()
        t = cloud.submit("sv1", gate_payload(1), 2000)
        counts = cloud.fetch_result(cloud.poll(t.id, 300).id)["counts"]
        assert 800 < counts.get("0", 0) < 1200

    def test_fetch_without_result(self):
        cloud = register_scenario()
        t = cloud.submit("sv1", TINY_GATE, 1)
        with pytest.raises(UnknownTaskError):
            cloud.fetch_result(t.id)

    def test_scaled_clock_sleeps(self):
        import time

        clock = VirtualClock(scale=0.001)
        t0 = time.perf_counter()
        clock.wait(20)
        assert time.perf_counter() - t0 >= 0.015
        with pytest.raises(ValueError):
            VirtualClock(scale=-1)


class TestPricing:
    def test_example(self):
        r = CostReceipt.of(Decimal("0.30"), Decimal("0.00035"), 1000)
        assert r.total == Decimal("0.65")

    def test_zero(self):
        assert register_scenario().price("local", 10**5).total == 0

    def test_linear(self):
        cloud = register_scenario()
        a, b = cloud.price("ionq", 100), cloud.price("ionq", 1000)
        assert b.shot_fee_total == 10 * a.shot_fee_total
        assert a.task_fee == b.task_fee == Decimal("0.30")

    def test_unknown(self):
        with pytest.raises(UnknownDeviceError):
            register_scenario().price("nope", 1)


class TestStore:
    def test_write_once(self):
        s = ObjectStore()
        s.put("a", b"1")
        with pytest.raises(DuplicateObjectError):
            s.put("a", b"2")
        assert s.get("a") == b"1"

    def test_missing_vs_empty(self):
        s = ObjectStore()
        s.put("empty", b"")
        assert s.get("empty") == b""
        with pytest.raises(MissingObjectError):
            s.get("absent")

    def test_snapshot(self, tmp_path):
        s = ObjectStore()
        s.put("results/x/1.json", b"{}")
        assert s.snapshot(tmp_path) == 1
        assert (tmp_path / "results/x/1.json").read_bytes() == b"{}"


def test_illegal_transition_rejected():
    t = QuantumTask("t", "local", 1, None)
    with pytest.raises(IllegalTransition):
        t.transition(TaskStatus.COMPLETED, 0.0)


DEVICES = ["local", "sv1", "tn1", "ionq", "riggeti_aspen8", "riggeti_aspen9", "dwave_dw2000", "dwave_advantage"]


def random_schedule(seed: int, n_tasks: int = 1000) -> QuantumCloud:
    """Randomly interleave submits, cancels, polls and clock advances."""
    rnd = random.Random(seed)
    cloud = register_scenario({"seed": seed})
    for name in ("sv1", "ionq", "dwave_dw2000"):
        cloud.update_device(name, execution_seconds=rnd.choice([0.0, 3.0, 40.0]))
    ids: list[str] = []
    while len(ids) < n_tasks:
        action = rnd.random()
        if action < 0.6:
            device = rnd.choice(DEVICES)
            if cloud.device(device).is_gate:
                payload = rnd.choice([TINY_GATE, gate_payload(12), BoomPayload()])
            else:
                payload = TINY_ANNEAL
            ids.append(cloud.submit(device, payload, rnd.randint(1, 20)).id)
        elif action < 0.75 and ids:
            cloud.cancel(rnd.choice(ids))
        elif action < 0.85 and ids:
            cloud.poll(rnd.choice(ids), rnd.uniform(0, 50))
        else:
            cloud.execute_pending(until=cloud.clock.now() + rnd.uniform(0, 60))
    cloud.execute_pending(until=cloud.clock.now() + 10_000)
    return cloud


class TestModelCheck:
    def test_edges_and_results(self):
        cloud = random_schedule(7)
        tasks = cloud.tasks()
        assert len(tasks) == 1000
        seen_status = set()
        for t in tasks:
            states = [TaskStatus(s) for s, _ in t.history]
            assert states[0] is TaskStatus.CREATED
            for a, b in zip(states, states[1:]):
                assert (a, b) in ALLOWED_TRANSITIONS
            times = [at for _, at in t.history]
            assert times == sorted(times)
            assert (t.result_key is not None) == (t.status is TaskStatus.COMPLETED)
            if t.status is TaskStatus.COMPLETED:
                assert json.loads(cloud.store.get(t.result_key))["task_id"] == t.id
            seen_status.add(t.status)
        assert seen_status >= {TaskStatus.COMPLETED, TaskStatus.FAILED, TaskStatus.CANCELLED}

    def test_accounting(self):
        cloud = random_schedule(11, 300)
        charged = Decimal(0)
        for t in cloud.tasks():
            states = [s for s, _ in t.history]
            if t.status is TaskStatus.COMPLETED or states[-2:] == ["RUNNING", "FAILED"]:
                charged += cloud.price(t.device, t.shots).total
            else:
                assert t.receipt is None
        assert sum(r.total for r in cloud.receipts().values()) == charged

    def test_deterministic(self):
        a = [(t.id, t.status, t.history, t.receipt) for t in random_schedule(3, 200).tasks()]
        b = [(t.id, t.status, t.history, t.receipt) for t in random_schedule(3, 200).tasks()]
        assert a == b
