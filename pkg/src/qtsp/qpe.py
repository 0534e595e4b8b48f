"""Gate-based TSP solver via quantum phase estimation.

Each Hamiltonian cycle is written as a basis state listing every city's
successor (``ceil(log2 n)`` bits per city, city 0 first). The unitary
``U = U_0 ⊗ ... ⊗ U_{n-1}`` is diagonal with ``U_j |k> = exp(i phi[j][k]) |k>``,
so a cycle state is an eigenvector whose phase is the sum of its encoded edge
costs. QPE writes that phase into a register of ``phase_bits`` qubits; the
cycle with the smallest measured phase is the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import statevector as sv
from .errors import CapacityError, DomainError
from .graph import CostMatrix, Tour, depot_rooted_tours, tour_cost

DEFAULT_PHASE_BITS = 6
MAX_EIGENSTATE_CITIES = 6
_MAX_DECIMALS = 6


def bits_per_city(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


def qubit_requirement(n: int, phase_bits: int = DEFAULT_PHASE_BITS) -> int:
    if n < 2:
        raise DomainError("need at least 2 cities")
    return n * bits_per_city(n) + phase_bits


@dataclass(frozen=True, eq=False)
class PhaseEncoding:
    phi: np.ndarray
    scale: float
    bits_per_city: int
    phase_bits: int = DEFAULT_PHASE_BITS

    @property
    def n(self) -> int:
        return self.phi.shape[0]


def _integer_costs(costs: np.ndarray) -> tuple[np.ndarray, int]:
    for p in range(_MAX_DECIMALS + 1):
        scaled = costs * 10**p
        rounded = np.round(scaled)
        if np.allclose(scaled, rounded, rtol=0, atol=1e-9 * max(1.0, float(scaled.max()))):
            return rounded.astype(np.int64), p
    return np.ceil(costs * 10**_MAX_DECIMALS).astype(np.int64), _MAX_DECIMALS


def encode_phases(m: CostMatrix, phase_bits: int = DEFAULT_PHASE_BITS) -> PhaseEncoding:
    """Map costs to phases so that every tour's total phase stays below 2*pi.

    Costs are brought to integers (at most 6 decimals) and divided by their
    common divisor ``g``; then one reduced unit maps to ``2*pi / (n*max + 1)``.
    The scale therefore only depends on the shape of the matrix, not its units.
    """
    if phase_bits < 1:
        raise DomainError("phase_bits must be positive")
    if m.max_cost <= 0:
        raise DomainError("all-zero cost matrix has no phase ordering")
    ints, decimals = _integer_costs(m.costs)
    g = reduce(math.gcd, (int(v) for v in ints.ravel() if v), 0) or 1
    reduced_max = int(ints.max()) / g
    scale = 2 * math.pi * 10**decimals / (g * (m.n * reduced_max + 1))
    phi = m.costs * scale
    phi.setflags(write=False)
    return PhaseEncoding(phi, scale, bits_per_city(m.n), phase_bits)


@dataclass(frozen=True)
class CycleEigenstate:
    tour: Tour
    successor: tuple[int, ...]
    basis_string: str

    @classmethod
    def from_tour(cls, tour: Tour) -> "CycleEigenstate":
        n = len(tour)
        b = bits_per_city(n)
        succ = [0] * n
        for i, city in enumerate(tour.order):
            succ[city] = tour.order[(i + 1) % n]
        bits = "".join(format(s, f"0{b}b") for s in succ)
        return cls(tour, tuple(succ), bits)

    def theta(self, enc: PhaseEncoding) -> float:
        """Exact eigenphase as a fraction of a full turn."""
        return float(sum(enc.phi[j, s] for j, s in enumerate(self.successor))) / (2 * math.pi)


def enumerate_eigenstates(m: CostMatrix) -> list[CycleEigenstate]:
    if m.n > MAX_EIGENSTATE_CITIES:
        raise CapacityError(f"eigenstate enumeration limited to {MAX_EIGENSTATE_CITIES} cities")
    return [CycleEigenstate.from_tour(t) for t in depot_rooted_tours(m.n, m.symmetric)]


def diagonal_phases(enc: PhaseEncoding, times: int = 1) -> np.ndarray:
    """Phase of ``U**times`` on every basis state of the eigenstate register.

    Successor codes that are not a valid other city contribute phase 0.
    """
    n, b = enc.n, enc.bits_per_city
    idx = np.arange(2 ** (n * b), dtype=np.int64)
    total = np.zeros(idx.size)
    padded = np.zeros((n, 2**b))
    for j in range(n):
        for k in range(min(n, 2**b)):
            if k != j:
                padded[j, k] = enc.phi[j, k]
    for j in range(n):
        code = (idx >> ((n - 1 - j) * b)) & (2**b - 1)
        total += padded[j, code]
    return times * total


def build_qpe_circuit(enc: PhaseEncoding, eig: CycleEigenstate) -> sv.Circuit:
    """Eigenstate register on qubits ``0 .. n*b-1``, phase register after it."""
    n, b, t = enc.n, enc.bits_per_city, enc.phase_bits
    width = n * b
    total = width + t
    if total > sv.MAX_QUBITS:
        raise CapacityError(f"QPE circuit needs {total} qubits, limit is {sv.MAX_QUBITS}")
    circ = sv.Circuit(total)
    circ.extend(sv.X(q) for q, bit in enumerate(eig.basis_string) if bit == "1")
    phase_reg = list(range(width, total))
    circ.extend(sv.H(q) for q in phase_reg)
    eig_reg = list(range(width))
    base = diagonal_phases(enc)
    for k in range(t):
        control = total - 1 - k  # significance 2**k
        circ.append(sv.C_DIAG([control], eig_reg, np.mod((2**k) * base, 2 * math.pi)))
    circ.extend(sv.inverse_qft(t, width))
    return circ


def phase_register(enc: PhaseEncoding) -> list[int]:
    width = enc.n * enc.bits_per_city
    return list(range(width, width + enc.phase_bits))


def qpe_kernel(theta: float, phase_bits: int) -> np.ndarray:
    """Closed-form probability of each outcome ``m`` when estimating ``theta``."""
    size = 2**phase_bits
    delta = theta - np.arange(size) / size
    out = np.empty(size)
    num = np.sin(size * np.pi * delta)
    den = size * np.sin(np.pi * delta)
    exact = np.isclose(np.mod(delta + 0.5, 1.0) - 0.5, 0.0, atol=1e-15)
    out[exact] = 1.0
    out[~exact] = (num[~exact] / den[~exact]) ** 2
    return out


def mode_of_counts(counts: dict[str, int]) -> int:
    """Most frequent outcome as an integer; ties go to the smaller value."""
    best = min(counts, key=lambda k: (-counts[k], int(k, 2)))
    return int(best, 2)


@dataclass(frozen=True)
class PhaseEstimate:
    eigenstate: CycleEigenstate
    measured_mode: int
    theta: float
    counts: sv.ShotResult


def estimate_from_counts(eig: CycleEigenstate, counts: sv.ShotResult, phase_bits: int) -> PhaseEstimate:
    mode = mode_of_counts(counts.counts)
    return PhaseEstimate(eig, mode, mode / 2**phase_bits, counts)


def estimate_phase(
    enc: PhaseEncoding,
    eig: CycleEigenstate,
    shots: int = 1000,
    seed: int = 0,
    flip: float = 0.0,
) -> PhaseEstimate:
    circ = build_qpe_circuit(enc, eig)
    result = sv.run(circ, phase_register(enc), shots, seed=seed, readout_flip=flip)
    return estimate_from_counts(eig, result, enc.phase_bits)


@dataclass(frozen=True)
class GateTspResult:
    tour: Tour
    estimates: tuple[PhaseEstimate, ...]
    tie: bool


def select_minimum(m: CostMatrix, estimates: list[PhaseEstimate]) -> GateTspResult:
    """Pick the eigenstate with the smallest measured phase.

    Equal modes are resolved by the classical tour cost, then by eigenstate order.
    """
    if not estimates:
        raise DomainError("no phase estimates to choose from")
    low = min(e.measured_mode for e in estimates)
    tied = [e for e in estimates if e.measured_mode == low]
    best = min(tied, key=lambda e: tour_cost(m, e.eigenstate.tour))
    return GateTspResult(best.eigenstate.tour, tuple(estimates), len(tied) > 1)


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, index]).generate_state(1, np.uint64)[0])


def solve_gate_tsp(
    m: CostMatrix,
    shots: int = 1000,
    phase_bits: int = DEFAULT_PHASE_BITS,
    seed: int = 0,
    flip: float = 0.0,
) -> GateTspResult:
    enc = encode_phases(m, phase_bits)
    eigs = enumerate_eigenstates(m)
    need = qubit_requirement(m.n, phase_bits)
    if need > sv.MAX_QUBITS:
        raise CapacityError(f"QPE circuit needs {need} qubits, limit is {sv.MAX_QUBITS}")
    estimates = [
        estimate_phase(enc, eig, shots, derive_seed(seed, i), flip) for i, eig in enumerate(eigs)
    ]
    return select_minimum(m, estimates)


def theta_resolution_ok(thetas: list[float], phase_bits: int) -> bool:
    """True when every pair of distinct eigenphases is separated by more than one bin."""
    ordered = sorted(thetas)
    return all(b - a > 2.0**-phase_bits for a, b in zip(ordered, ordered[1:]))
