"""TSP instances, tours and the exhaustive reference solver.

Conventions used across the package:

* city 0 is the depot and every tour starts there;
* a tour of ``n`` cities has ``n`` edges, the last one closing back to the depot;
* two tours are the same solution when one is a rotation of the other, or of
  its reversal when the matrix is symmetric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DomainError, FormatError

SYMMETRY_TOL = 1e-9
MAX_BRUTE_FORCE_CITIES = 12


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Square matrix of non-negative travel costs.

    Use :meth:`from_array` (or :func:`parse_matrix`) rather than the raw
    constructor; it validates the invariants and freezes the array.
    """

    costs: np.ndarray
    symmetric: bool

    @classmethod
    def from_array(cls, values: Iterable[Iterable[float]] | np.ndarray) -> "CostMatrix":
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise FormatError(f"cost matrix must be square, got shape {arr.shape}")
        n = arr.shape[0]
        if n < 2:
            raise DomainError(f"need at least 2 cities, got {n}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("cost matrix entries must be finite")
        if np.any(arr < 0):
            raise DomainError("cost matrix entries must be non-negative")
        if np.any(np.diag(arr) != 0):
            raise DomainError("cost matrix diagonal must be exactly 0")
        symmetric = bool(np.allclose(arr, arr.T, rtol=0.0, atol=SYMMETRY_TOL))
        arr.setflags(write=False)
        return cls(arr, symmetric)

    @property
    def n(self) -> int:
        return self.costs.shape[0]

    @property
    def max_cost(self) -> float:
        return float(self.costs.max())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return self.symmetric == other.symmetric and np.array_equal(self.costs, other.costs)

    def __hash__(self) -> int:
        return hash((self.costs.tobytes(), self.symmetric))


@dataclass(frozen=True)
class Tour:
    """Depot-rooted visiting order: a permutation of ``0..n-1`` with ``order[0] == 0``."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(c) for c in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(len(order))):
            raise DomainError(f"tour {list(order)} is not a permutation of 0..{len(order) - 1}")
        if not order or order[0] != 0:
            raise DomainError(f"tour {list(order)} must start at the depot (city 0)")

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def as_list(self) -> list[int]:
        return list(self.order)


def parse_matrix(text: str) -> CostMatrix:
    """Parse whitespace-separated rows, one per line, into a :class:`CostMatrix`.

    Blank lines are ignored. Raises :class:`FormatError` for ragged or
    non-numeric rows and :class:`DomainError` for negative entries, a
    nonzero diagonal or fewer than two cities.
    """
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    if not rows:
        raise DomainError("empty matrix")
    n = len(rows)
    for lineno, row in enumerate(rows, start=1):
        if len(row) != n:
            raise FormatError(f"row {lineno} has {len(row)} entries, expected {n}")
    return CostMatrix.from_array(rows)


def serialize_matrix(m: CostMatrix) -> str:
    return "\n".join(" ".join(f"{v:.9g}" for v in row) for row in m.costs) + "\n"


def tour_cost(m: CostMatrix, tour: Tour | Sequence[int]) -> float:
    order = tour.order if isinstance(tour, Tour) else tuple(tour)
    if len(order) != m.n:
        raise DomainError(f"tour has {len(order)} cities, matrix has {m.n}")
    c = m.costs
    return float(sum(c[order[i], order[(i + 1) % m.n]] for i in range(m.n)))


def _rotations(order: Sequence[int]) -> list[tuple[int, ...]]:
    seq = tuple(order)
    return [seq[k:] + seq[:k] for k in range(len(seq))]


def canonical_tour(order: Sequence[int], symmetric: bool) -> Tour:
    """Rotate the depot to the front; for symmetric instances also pick the
    lexicographically smaller of the two directions."""
    seq = list(order)
    k = seq.index(0)
    fwd = tuple(seq[k:] + seq[:k])
    if symmetric:
        rev = (0,) + tuple(reversed(fwd[1:]))
        fwd = min(fwd, rev)
    return Tour(fwd)


def tours_equivalent(a: Tour | Sequence[int], b: Tour | Sequence[int], symmetric: bool) -> bool:
    a_seq = tuple(a.order if isinstance(a, Tour) else a)
    b_seq = tuple(b.order if isinstance(b, Tour) else b)
    if len(a_seq) != len(b_seq):
        return False
    candidates = set(_rotations(a_seq))
    if symmetric:
        candidates.update(_rotations(tuple(reversed(a_seq))))
    return b_seq in candidates


def depot_rooted_tours(n: int, symmetric: bool) -> Iterable[Tour]:
    """All tours in lexicographic order; with ``symmetric`` only the
    lexicographically smaller direction of each cycle is produced."""
    for rest in itertools.permutations(range(1, n)):
        if symmetric and len(rest) > 1 and rest[0] > rest[-1]:
            continue
        yield Tour((0,) + rest)


def brute_force_optimum(m: CostMatrix) -> tuple[Tour, float]:
    """Exhaustive minimum over all depot-rooted tours.

    Ties go to the lexicographically smallest order.
    """
    if m.n > MAX_BRUTE_FORCE_CITIES:
        raise CapacityError(
            f"brute force limited to {MAX_BRUTE_FORCE_CITIES} cities "
            f"({math.factorial(m.n - 1)} tours requested)"
        )
    best: tuple[Tour, float] | None = None
    for tour in depot_rooted_tours(m.n, m.symmetric):
        cost = tour_cost(m, tour)
        if best is None or cost < best[1]:
            best = (tour, cost)
    assert best is not None
    return best


def random_matrix(
    n: int,
    rng: np.random.Generator,
    *,
    low: int = 1,
    high: int = 10,
    symmetric: bool = True,
) -> CostMatrix:
    """Uniform random integer costs in ``[low, high]`` with a zero diagonal."""
    values = rng.integers(low, high + 1, size=(n, n)).astype(float)
    if symmetric:
        values = np.triu(values, 1)
        values = values + values.T
    np.fill_diagonal(values, 0.0)
    return CostMatrix.from_array(values)


# Bundled reference instance; optimum is the cycle 0-2-1-3 at cost 10.
M_STAR = CostMatrix.from_array(
    [
        [0, 10, 4, 1],
        [10, 0, 3, 2],
        [4, 3, 0, 10],
        [1, 2, 10, 0],
    ]
)
