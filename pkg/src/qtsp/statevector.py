"""Dense statevector simulator for the gate set the QPE solver needs.

Bit order: qubit 0 is the most significant bit of every basis label and of
every measured bit string. Internally the amplitude vector is viewed as a
rank-``q`` tensor whose axis ``k`` is qubit ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError

MAX_QUBITS = 24

_KINDS = ("X", "H", "PHASE", "CPHASE", "SWAP", "C_DIAG")


@dataclass(frozen=True)
class Gate:
    """One gate. ``qubits`` lists every qubit touched, controls first.

    For ``C_DIAG`` the phase table is indexed by the targets' sub-word, first
    target most significant.
    """

    kind: str
    qubits: tuple[int, ...]
    theta: float = 0.0
    num_controls: int = 0
    table: tuple[float, ...] | np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise DomainError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise DomainError(f"{self.kind}: control and target qubits must be distinct")
        if not math.isfinite(self.theta):
            raise DomainError(f"{self.kind}: angle must be finite")
        if self.kind == "C_DIAG":
            table = np.asarray(self.table, dtype=float)
            if table.shape != (2 ** len(self.targets),):
                raise DomainError(
                    f"C_DIAG table needs {2 ** len(self.targets)} entries, got {table.size}"
                )
            if not np.all(np.isfinite(table)):
                raise DomainError("C_DIAG phases must be finite")
            table.setflags(write=False)
            object.__setattr__(self, "table", table)

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[: self.num_controls]

    @property
    def targets(self) -> tuple[int, ...]:
        return self.qubits[self.num_controls :]


def X(q: int) -> Gate:
    return Gate("X", (q,))


def H(q: int) -> Gate:
    return Gate("H", (q,))


def PHASE(q: int, theta: float) -> Gate:
    return Gate("PHASE", (q,), theta=theta)


def CPHASE(control: int, target: int, theta: float) -> Gate:
    return Gate("CPHASE", (control, target), theta=theta, num_controls=1)


def SWAP(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


def C_DIAG(controls: Sequence[int], targets: Sequence[int], table: Sequence[float] | np.ndarray) -> Gate:
    return Gate("C_DIAG", tuple(controls) + tuple(targets), num_controls=len(controls), table=table)


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise DomainError("a circuit needs at least one qubit")
        gates, self.gates = list(self.gates), []
        self.extend(gates)

    def append(self, gate: Gate) -> "Circuit":
        bad = [q for q in gate.qubits if not 0 <= q < self.num_qubits]
        if bad:
            raise DomainError(f"{gate.kind} on qubit(s) {bad} outside 0..{self.num_qubits - 1}")
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self


@dataclass(frozen=True)
class ShotResult:
    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise DomainError("counts must sum to shots")


class StateVector:
    """``2**num_qubits`` complex amplitudes."""

    def __init__(self, amplitudes: np.ndarray | Sequence[complex]):
        amps = np.array(amplitudes, dtype=np.complex128)
        q = int(round(math.log2(amps.size))) if amps.size else -1
        if amps.ndim != 1 or q < 1 or 2**q != amps.size:
            raise DomainError("amplitude vector length must be a power of two >= 2")
        self.amplitudes = amps
        self.num_qubits = q

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0) -> "StateVector":
        if num_qubits > MAX_QUBITS:
            raise CapacityError(f"{num_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
        amps = np.zeros(2**num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def probabilities(self, measured: Sequence[int] | None = None) -> np.ndarray:
        """Marginal distribution over ``measured`` (first listed = most significant)."""
        q = self.num_qubits
        measured = list(range(q)) if measured is None else list(measured)
        probs = (np.abs(self.amplitudes) ** 2).reshape((2,) * q)
        others = tuple(k for k in range(q) if k not in measured)
        marg = probs.sum(axis=others) if others else probs
        # remaining axes are in ascending qubit order; permute to the requested order
        kept = sorted(measured)
        marg = np.transpose(marg, [kept.index(k) for k in measured])
        return marg.reshape(-1)


def _basis_bits(num_qubits: int, qubits: Sequence[int]) -> np.ndarray:
    """Integer word formed by ``qubits`` (first = MSB) for every basis index."""
    idx = np.arange(2**num_qubits, dtype=np.int64)
    word = np.zeros_like(idx)
    for q in qubits:
        word = (word << 1) | ((idx >> (num_qubits - 1 - q)) & 1)
    return word


def _at(num_qubits: int, fixed: dict[int, int]) -> tuple:
    index: list = [slice(None)] * num_qubits
    for q, v in fixed.items():
        index[q] = v
    return tuple(index)


def _apply_inplace(psi: np.ndarray, num_qubits: int, g: Gate) -> np.ndarray:
    t = psi.reshape((2,) * num_qubits)
    kind = g.kind
    if kind == "X":
        t = np.flip(t, axis=g.qubits[0])
    elif kind == "H":
        (q,) = g.qubits
        lo, hi = _at(num_qubits, {q: 0}), _at(num_qubits, {q: 1})
        a0, a1 = t[lo].copy(), t[hi].copy()
        t[lo] = (a0 + a1) / math.sqrt(2)
        t[hi] = (a0 - a1) / math.sqrt(2)
    elif kind == "PHASE":
        t[_at(num_qubits, {g.qubits[0]: 1})] *= np.exp(1j * g.theta)
    elif kind == "CPHASE":
        c, q = g.qubits
        t[_at(num_qubits, {c: 1, q: 1})] *= np.exp(1j * g.theta)
    elif kind == "SWAP":
        t = np.swapaxes(t, *g.qubits)
    elif kind == "C_DIAG":
        flat = t.reshape(-1)
        mask = _basis_bits(num_qubits, g.controls) == (1 << len(g.controls)) - 1
        word = _basis_bits(num_qubits, g.targets)
        flat[mask] *= np.exp(1j * np.asarray(g.table)[word[mask]])
        return flat
    return np.ascontiguousarray(t).reshape(-1)


def apply(state: StateVector, g: Gate) -> StateVector:
    """Return a new state with ``g`` applied; ``state`` is left untouched."""
    bad = [q for q in g.qubits if not 0 <= q < state.num_qubits]
    if bad:
        raise DomainError(f"{g.kind} on qubit(s) {bad} outside 0..{state.num_qubits - 1}")
    return StateVector(_apply_inplace(state.amplitudes.copy(), state.num_qubits, g))


def simulate(c: Circuit, initial: StateVector | None = None) -> StateVector:
    if c.num_qubits > MAX_QUBITS:
        raise CapacityError(f"{c.num_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
    psi = (initial.amplitudes.copy() if initial is not None else StateVector.basis(c.num_qubits).amplitudes)
    for g in c.gates:
        psi = _apply_inplace(psi, c.num_qubits, g)
    return StateVector(psi)


def qft(width: int, offset: int = 0) -> list[Gate]:
    """Forward QFT on ``offset .. offset+width-1`` (``offset`` is the MSB)."""
    gates: list[Gate] = []
    for j in range(width):
        gates.append(H(offset + j))
        for k in range(j + 1, width):
            gates.append(CPHASE(offset + k, offset + j, math.pi / 2 ** (k - j)))
    for j in range(width // 2):
        gates.append(SWAP(offset + j, offset + width - 1 - j))
    return gates


def inverse_qft(width: int, offset: int = 0) -> list[Gate]:
    """Adjoint of :func:`qft`: swap reversal, then a controlled-phase ladder
    and Hadamard per qubit from the least significant end."""
    gates: list[Gate] = []
    for j in range(width // 2):
        gates.append(SWAP(offset + j, offset + width - 1 - j))
    for j in reversed(range(width)):
        for k in reversed(range(j + 1, width)):
            gates.append(CPHASE(offset + k, offset + j, -math.pi / 2 ** (k - j)))
        gates.append(H(offset + j))
    return gates


def sample_counts(
    probs: np.ndarray,
    width: int,
    shots: int,
    rng: np.random.Generator,
    readout_flip: float = 0.0,
) -> dict[str, int]:
    """Draw ``shots`` outcomes from ``probs`` and apply independent bit flips."""
    p = np.clip(probs, 0.0, None)
    p = p / p.sum()
    outcomes = rng.choice(p.size, size=shots, p=p)
    if readout_flip > 0:
        weights = 1 << np.arange(width - 1, -1, -1)
        flips = rng.random((shots, width)) < readout_flip
        outcomes = outcomes ^ (flips.astype(np.int64) @ weights)
    values, counts = np.unique(outcomes, return_counts=True)
    return {format(int(v), f"0{width}b"): int(c) for v, c in zip(values, counts)}


def run(
    c: Circuit,
    measured: Sequence[int],
    shots: int,
    seed: int = 0,
    readout_flip: float = 0.0,
) -> ShotResult:
    """Simulate ``c`` exactly and sample ``shots`` readouts of ``measured``."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    if not 0.0 <= readout_flip <= 0.5:
        raise DomainError("readout_flip must lie in [0, 0.5]")
    measured = list(measured)
    if not measured or len(set(measured)) != len(measured):
        raise DomainError("measured qubits must be a non-empty list without repeats")
    if any(not 0 <= q < c.num_qubits for q in measured):
        raise DomainError("measured qubit outside the circuit")
    state = simulate(c)
    probs = state.probabilities(measured)
    rng = np.random.default_rng(seed)
    return ShotResult(sample_counts(probs, len(measured), shots, rng, readout_flip), shots)
