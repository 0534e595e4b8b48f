"""What a task carries to a device and how each paradigm executes it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .. import qubo as qb
from .. import statevector as sv
from ..graph import CostMatrix


@dataclass(frozen=True)
class GatePayload:
    circuit: sv.Circuit
    measured: tuple[int, ...]

    paradigm = "gate"

    @property
    def requirement(self) -> int:
        return self.circuit.num_qubits

    def execute(self, shots: int, seed: int, readout_flip: float, **_: Any) -> dict[str, Any]:
        result = sv.run(self.circuit, self.measured, shots, seed=seed, readout_flip=readout_flip)
        return {
            "kind": "counts",
            "num_qubits": self.circuit.num_qubits,
            "measured_qubits": list(self.measured),
            "counts": dict(sorted(result.counts.items())),
        }


@dataclass(frozen=True)
class AnnealPayload:
    """TSP instance for an annealer; the QUBO is built on the device."""

    matrix: CostMatrix
    penalty: float | None = None

    paradigm = "annealing"

    @property
    def requirement(self) -> int:
        return self.matrix.n**2

    def execute(self, shots: int, seed: int, anneal_sweeps: int = 1000, **_: Any) -> dict[str, Any]:
        q = qb.encode_tsp_qubo(self.matrix, self.penalty)
        samples = qb.anneal(q, shots, qb.AnnealSchedule(sweeps=anneal_sweeps, seed=seed))
        return {
            "kind": "samples",
            "num_variables": q.num_vars,
            "samples": [
                {
                    "assignment": "".join(str(b) for b in s.assignment),
                    "energy": s.energy,
                    "occurrences": s.occurrences,
                }
                for s in samples
            ],
        }
