import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtsp.errors import CapacityError, DomainError, FormatError
from qtsp.graph import (
    CostMatrix,
    M_STAR,
    Tour,
    brute_force_optimum,
    canonical_tour,
    depot_rooted_tours,
    parse_matrix,
    random_matrix,
    serialize_matrix,
    tour_cost,
    tours_equivalent,
)


class TestParse:
    def test_two_cities(self):
        m = parse_matrix("0 1\n1 0")
        assert m.n == 2
        assert m.symmetric

    def test_m_star_round_trip(self):
        m = parse_matrix(serialize_matrix(M_STAR))
        assert m.symmetric and m.n == 4
        assert np.array_equal(m.costs, M_STAR.costs)

    def test_ragged(self):
        with pytest.raises(FormatError):
            parse_matrix("0 1\n1 0 1")

    @pytest.mark.parametrize(
        "text",
        ["0 -1\n1 0", "1 1\n1 0", "0"],
        ids=["negative", "diagonal", "one-city"],
    )
    def test_domain_errors(self, text):
        with pytest.raises(DomainError):
            parse_matrix(text)

    def test_garbage(self):
        with pytest.raises(FormatError):
            parse_matrix("0 a\nb 0")

    def test_asymmetric_detected(self):
        assert not parse_matrix("0 1 2\n2 0 1\n1 2 0").symmetric

    def test_symmetry_tolerance(self):
        assert parse_matrix("0 1.0000000001\n1 0").symmetric

    def test_serializer_format(self):
        assert serialize_matrix(parse_matrix("0 1.5\n1.5 0")) == "0 1.5\n1.5 0\n"


class TestTourCost:
    def test_m_star_optimum(self):
        assert tour_cost(M_STAR, [0, 2, 1, 3]) == 10

    def test_m_star_other_cycles(self):
        assert tour_cost(M_STAR, [0, 1, 2, 3]) == 24
        assert tour_cost(M_STAR, [0, 1, 3, 2]) == 26

    def test_two_cycle(self):
        m = CostMatrix.from_array([[0, 3], [5, 0]])
        assert tour_cost(m, [0, 1]) == 8

    def test_zero_matrix(self):
        assert tour_cost(CostMatrix.from_array(np.zeros((5, 5))), [0, 3, 1, 4, 2]) == 0

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            tour_cost(M_STAR, [0, 1, 2])


class TestBruteForce:
    def test_m_star(self):
        tour, cost = brute_force_optimum(M_STAR)
        assert tour.as_list() == [0, 2, 1, 3]
        assert cost == 10

    def test_degenerate_lexicographic(self):
        m = CostMatrix.from_array(np.full((5, 5), 2.0) - 2 * np.eye(5))
        tour, cost = brute_force_optimum(m)
        assert tour.as_list() == [0, 1, 2, 3, 4]
        assert cost == 10

    def test_two_city(self):
        tour, cost = brute_force_optimum(CostMatrix.from_array([[0, 2], [7, 0]]))
        assert tour.as_list() == [0, 1] and cost == 9

    def test_guard(self):
        with pytest.raises(CapacityError):
            brute_force_optimum(random_matrix(13, np.random.default_rng(0)))

    def test_tour_counts(self):
        assert len(list(depot_rooted_tours(5, symmetric=False))) == 24
        assert len(list(depot_rooted_tours(5, symmetric=True))) == 12

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_no_random_tour_beats_it(self, n):
        rng = np.random.default_rng(n)
        m = random_matrix(n, rng, symmetric=bool(n % 2))
        _, best = brute_force_optimum(m)
        for _ in range(1000):
            order = [0, *rng.permutation(np.arange(1, n))]
            assert best <= tour_cost(m, order) + 1e-9


class TestEquivalence:
    def test_examples(self):
        assert tours_equivalent([0, 3, 1, 2], [0, 2, 1, 3], symmetric=True)
        assert not tours_equivalent([0, 1, 2, 3], [0, 2, 1, 3], symmetric=True)
        assert tours_equivalent([0, 1, 2, 3], [0, 1, 2, 3], symmetric=False)

    def test_reversal_needs_symmetry(self):
        assert not tours_equivalent([0, 3, 1, 2], [0, 2, 1, 3], symmetric=False)

    def test_rotation(self):
        assert tours_equivalent([2, 3, 0, 1], [0, 1, 2, 3], symmetric=False)

    def test_canonical_form(self):
        assert canonical_tour([1, 3, 0, 2], symmetric=True).as_list() == [0, 2, 1, 3]
        assert canonical_tour([1, 3, 0, 2], symmetric=False).as_list() == [0, 2, 1, 3]
        assert canonical_tour([3, 1, 2, 0], symmetric=False).as_list() == [0, 3, 1, 2]

    def test_tour_rejects_non_permutation(self):
        with pytest.raises(DomainError):
            Tour((0, 1, 1))


perms = st.integers(3, 7).flatmap(lambda n: st.permutations(list(range(n))))


@given(perms, perms, st.integers(0, 10))
def test_equivalence_relation(a, other, shift):
    n = len(a)
    b = a[shift % n:] + a[: shift % n]
    c = list(reversed(b))
    d = other if len(other) == n else a
    for sym in (True, False):
        assert tours_equivalent(a, a, sym)
        assert tours_equivalent(a, b, sym)
        assert tours_equivalent(a, d, sym) == tours_equivalent(d, a, sym)
        if tours_equivalent(a, d, sym) and tours_equivalent(d, c, sym):
            assert tours_equivalent(a, c, sym)
    assert tours_equivalent(a, c, True)


@given(st.integers(3, 7), st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_cost_invariant_under_rotation_and_reversal(n, seed, shift):
    rng = np.random.default_rng(seed)
    m = random_matrix(n, rng)
    order = list(rng.permutation(n))
    rotated = order[shift % n:] + order[: shift % n]
    assert tour_cost(m, rotated) == pytest.approx(tour_cost(m, order))
    assert tour_cost(m, order[::-1]) == pytest.approx(tour_cost(m, order))


@given(
    st.integers(2, 6).flatmap(
        lambda n: st.lists(
            st.lists(st.floats(0, 1e6, allow_nan=False), min_size=n, max_size=n),
            min_size=n,
            max_size=n,
        )
    )
)
def test_serialize_round_trip(rows):
    a = np.array(rows)
    np.fill_diagonal(a, 0)
    m = CostMatrix.from_array(a)
    back = parse_matrix(serialize_matrix(m))
    assert np.allclose(back.costs, m.costs, rtol=1e-8, atol=1e-9)


def test_every_symmetric_tour_enumerated_once():
    seen = set()
    for t in depot_rooted_tours(6, symmetric=True):
        key = canonical_tour(t.order, True).order
        assert key not in seen
        seen.add(key)
    total = {canonical_tour((0, *p), True).order for p in itertools.permutations(range(1, 6))}
    assert seen == total
