"""QUBO encoding of the TSP and a simulated-annealing sampler.

Binary variable ``x[v*n + p]`` is 1 when city ``v`` occupies tour position
``p``. The encoding does not pin the depot to position 0; decoded tours are
rotated instead, which keeps every position equivalent.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence

import numba
import numpy as np

from .errors import DomainError
from .graph import CostMatrix, Tour, canonical_tour


@dataclass(frozen=True)
class QuboProblem:
    """Upper-triangular quadratic form ``offset + sum coeff[i, j] x_i x_j``."""

    num_vars: int
    coefficients: Mapping[tuple[int, int], float]
    offset: float = 0.0

    def __post_init__(self) -> None:
        clean: dict[tuple[int, int], float] = {}
        for (i, j), value in self.coefficients.items():
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if not 0 <= i <= j < self.num_vars:
                raise DomainError(f"coefficient index ({i}, {j}) outside 0..{self.num_vars - 1}")
            if not np.isfinite(value):
                raise DomainError(f"coefficient ({i}, {j}) is not finite")
            clean[(i, j)] = clean.get((i, j), 0.0) + float(value)
        object.__setattr__(self, "coefficients", MappingProxyType(dict(sorted(clean.items()))))

    @cached_property
    def _terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        keys = list(self.coefficients)
        rows = np.array([k[0] for k in keys], dtype=np.intp)
        cols = np.array([k[1] for k in keys], dtype=np.intp)
        vals = np.array(list(self.coefficients.values()), dtype=float)
        return rows, cols, vals

    @cached_property
    def couplings(self) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric off-diagonal coupling matrix and the linear (diagonal) terms."""
        w = np.zeros((self.num_vars, self.num_vars))
        lin = np.zeros(self.num_vars)
        for (i, j), v in self.coefficients.items():
            if i == j:
                lin[i] += v
            else:
                w[i, j] += v
                w[j, i] += v
        return w, lin

    @property
    def max_abs_coefficient(self) -> float:
        return max((abs(v) for v in self.coefficients.values()), default=0.0)


@dataclass(frozen=True)
class BinarySample:
    assignment: tuple[int, ...]
    energy: float
    occurrences: int


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling schedule. ``t_initial=None`` means "max |coefficient|"."""

    sweeps: int = 1000
    t_initial: float | None = None
    t_final: float = 0.01
    seed: int = 0

    def temperatures(self, q: QuboProblem) -> np.ndarray:
        t_hi = self.t_initial if self.t_initial is not None else max(q.max_abs_coefficient, 2 * self.t_final)
        if self.sweeps < 1:
            raise DomainError("sweeps must be positive")
        if not t_hi > self.t_final > 0:
            raise DomainError(f"need t_initial > t_final > 0, got {t_hi} and {self.t_final}")
        return np.geomspace(t_hi, self.t_final, self.sweeps)


def default_penalty(m: CostMatrix) -> float:
    return m.n * m.max_cost + 1.0


def encode_tsp_qubo(m: CostMatrix, penalty: float | None = None) -> QuboProblem:
    """Expand the one-hot row/column penalties and the tour-length objective.

    For any permutation assignment the energy equals the cost of the encoded
    cycle; every constraint violation adds at least ``penalty``.
    """
    if penalty is None:
        penalty = default_penalty(m)
    if penalty <= 0:
        raise DomainError("penalty must be positive")
    n = m.n
    coeff: dict[tuple[int, int], float] = defaultdict(float)

    def var(city: int, pos: int) -> int:
        return city * n + pos

    # (1 - sum x)^2 = 1 - sum x + 2 sum_{i<j} x_i x_j over binary x
    for v in range(n):
        for p in range(n):
            coeff[var(v, p), var(v, p)] -= 2.0 * penalty  # one from the row family, one from the column family
    for v in range(n):
        for p in range(n):
            for p2 in range(p + 1, n):
                coeff[var(v, p), var(v, p2)] += 2.0 * penalty
    for p in range(n):
        for v in range(n):
            for v2 in range(v + 1, n):
                coeff[var(v, p), var(v2, p)] += 2.0 * penalty

    c = m.costs
    for u in range(n):
        for v in range(n):
            if u == v or c[u, v] == 0:
                continue
            for p in range(n):
                a, b = var(u, p), var(v, (p + 1) % n)
                coeff[min(a, b), max(a, b)] += float(c[u, v])

    return QuboProblem(n * n, dict(coeff), offset=2.0 * n * penalty)


def qubo_energies(q: QuboProblem, assignments: np.ndarray) -> np.ndarray:
    """Energies of a batch of assignments, shape ``(k, num_vars)``."""
    x = np.asarray(assignments)
    if x.ndim != 2 or x.shape[1] != q.num_vars:
        raise DomainError(f"expected assignments of length {q.num_vars}, got shape {x.shape}")
    rows, cols, vals = q._terms
    if vals.size == 0:
        return np.full(x.shape[0], q.offset)
    active = x[:, rows].astype(bool) & x[:, cols].astype(bool)
    terms = np.ascontiguousarray(np.where(active, vals, 0.0))
    return q.offset + terms.sum(axis=1)


def qubo_energy(q: QuboProblem, x: Sequence[int] | np.ndarray) -> float:
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.shape[0] != q.num_vars:
        raise DomainError(f"expected {q.num_vars} bits, got {arr.shape}")
    return float(qubo_energies(q, arr[None, :])[0])


@numba.njit(cache=True, inline="always")
def _splitmix(state):
    state = state + numba.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    z = z ^ (z >> numba.uint64(31))
    return state, z


@numba.njit(cache=True)
def _anneal_kernel(w, lin, temps, seed, shots, out):
    n = w.shape[0]
    h = np.empty(n)
    x = np.zeros(n, np.uint8)
    _, seed_mix = _splitmix(numba.uint64(seed))
    for r in range(shots):
        _, r_mix = _splitmix(numba.uint64(r) + numba.uint64(1))
        s = seed_mix ^ r_mix
        for i in range(n):
            s, z = _splitmix(s)
            x[i] = z >> numba.uint64(63)
        for i in range(n):
            acc = lin[i]
            for j in range(n):
                if x[j]:
                    acc += w[i, j]
            h[i] = acc
        for t in temps:
            cutoff = 40.0 * t  # exp(-40) is below double resolution of the uniform draw
            for i in range(n):
                d = h[i] if x[i] == 0 else -h[i]
                accept = d <= 0.0
                if not accept and d < cutoff:
                    s, z = _splitmix(s)
                    u = (z >> numba.uint64(11)) * (1.0 / 9007199254740992.0)
                    accept = u < np.exp(-d / t)
                if accept:
                    sign = 1.0 if x[i] == 0 else -1.0
                    x[i] ^= 1
                    for j in range(n):
                        h[j] += sign * w[j, i]
        for i in range(n):
            out[r, i] = x[i]


def anneal(q: QuboProblem, shots: int, sched: AnnealSchedule | None = None) -> list[BinarySample]:
    """Run ``shots`` independent single-flip Metropolis restarts.

    Restart ``r`` draws from its own stream derived from ``(sched.seed, r)``,
    so results depend only on the inputs. Identical assignments are merged;
    the returned list is sorted by energy, then by assignment.
    """
    if shots < 1:
        raise DomainError("shots must be >= 1")
    sched = sched or AnnealSchedule()
    temps = sched.temperatures(q)
    w, lin = q.couplings
    out = np.zeros((shots, q.num_vars), dtype=np.uint8)
    if q.num_vars:
        _anneal_kernel(w, lin, temps, np.uint64(sched.seed & 0xFFFFFFFFFFFFFFFF), shots, out)
    uniq, counts = np.unique(out, axis=0, return_counts=True)
    energies = qubo_energies(q, uniq)
    samples = [
        BinarySample(tuple(int(b) for b in row), float(e), int(c))
        for row, e, c in zip(uniq, energies, counts)
    ]
    samples.sort(key=lambda s: (s.energy, s.assignment))
    return samples


def decode_tour(m: CostMatrix, x: Sequence[int] | np.ndarray) -> Tour | None:
    """Read a tour from a permutation-matrix assignment, or ``None`` if infeasible."""
    n = m.n
    arr = np.asarray(x, dtype=int)
    if arr.shape != (n * n,):
        raise DomainError(f"expected {n * n} bits, got shape {arr.shape}")
    grid = arr.reshape(n, n)  # grid[city, position]
    if not (np.all(grid.sum(axis=0) == 1) and np.all(grid.sum(axis=1) == 1)):
        return None
    order = [int(np.argmax(grid[:, p])) for p in range(n)]
    return canonical_tour(order, m.symmetric)


def encode_assignment(n: int, order: Sequence[int]) -> np.ndarray:
    """Permutation-matrix bits placing ``order[p]`` at position ``p``."""
    x = np.zeros(n * n, dtype=np.uint8)
    for p, city in enumerate(order):
        x[city * n + p] = 1
    return x
