from fractions import Fraction
from functools import lru_cache
import itertools

import pytest
from hypothesis import given, strategies as st

from tsirelson.errors import DomainError
from tsirelson.families import (
    FamilySpec,
    family_member,
    greedy_blocks,
    is_admissible,
    max_weight_subfamily,
    max_weight_subfamily_exhaustive,
    maximal_family_subset,
    modified_member,
    schreier_member_bruteforce,
)


@lru_cache(maxsize=None)
def schreier_by_definition(F: tuple, n: int) -> bool:
    """Independent oracle: try every split into successive pieces."""
    if not F:
        return True
    if n == 0:
        return len(F) == 1
    for cuts in itertools.product((False, True), repeat=len(F) - 1):
        pieces, cur = [], [F[0]]
        for a, cut in zip(F[1:], cuts):
            if cut:
                pieces.append(tuple(cur))
                cur = []
            cur.append(a)
        pieces.append(tuple(cur))
        if len(pieces) <= F[0] and all(schreier_by_definition(p, n - 1) for p in pieces):
            return True
    return False


small_sets = st.lists(st.integers(1, 11), max_size=7, unique=True).map(lambda xs: tuple(sorted(xs)))


@pytest.mark.parametrize("F, spec, expected", [
    ({5}, "S0", True),
    ({3, 4, 5}, "S1", True),
    ({2, 3, 4}, "S1", False),
    ({2, 3, 4, 5, 6, 7}, "S2", True),
    ({1, 7}, "A2", True),
    ({1, 7, 9}, "A2", False),
    (set(), "S3", True),
])
def test_membership_examples(F, spec, expected):
    assert family_member(F, FamilySpec.parse(spec)) is expected


def test_spec_parsing():
    assert FamilySpec.parse("S_2") == FamilySpec("S", 2)
    assert FamilySpec.parse("A3") == FamilySpec("A", 3)
    with pytest.raises(DomainError):
        FamilySpec.parse("B1")


@given(small_sets, st.integers(0, 3))
def test_greedy_membership_matches_definition(F, n):
    assert family_member(F, FamilySpec("S", n)) == schreier_by_definition(F, n)


@given(small_sets, st.integers(1, 2))
def test_bruteforce_route_matches_definition(F, n):
    assert schreier_member_bruteforce(F, n) == schreier_by_definition(F, n)


@given(small_sets, st.integers(1, 2))
def test_modified_equals_schreier(F, n):
    assert modified_member(F, n) == family_member(F, FamilySpec("S", n))


@given(small_sets, st.integers(0, 2), st.data())
def test_hereditary(F, n, data):
    spec = FamilySpec("S", n)
    if family_member(F, spec):
        G = data.draw(st.sets(st.sampled_from(F)) if F else st.just(set()))
        assert family_member(G, spec)


@given(small_sets, st.integers(0, 2), st.lists(st.integers(0, 3), min_size=7, max_size=7))
def test_spreading(F, n, bumps):
    spec = FamilySpec("S", n)
    if family_member(F, spec):
        spread, last = [], 0
        for f, b in zip(F, bumps):
            last = max(f + b, last + 1)
            spread.append(last)
        assert family_member(spread, spec)


@pytest.mark.parametrize("stream, spec, expected", [
    (itertools.count(4, 2), "S1", (4, 6, 8, 10)),
    (itertools.count(1), "S0", (1,)),
    (itertools.count(4), "S2", tuple(range(4, 64))),
])
def test_maximal_subset_examples(stream, spec, expected):
    assert maximal_family_subset(stream, FamilySpec.parse(spec)) == expected


@given(st.integers(1, 9), st.integers(0, 2))
def test_maximal_subset_is_maximal(start, n):
    spec = FamilySpec("S", n)
    F = maximal_family_subset(itertools.count(start), spec)
    assert family_member(F, spec)
    assert not family_member(F + (F[-1] + 1,), spec)


def test_maximal_subset_empty():
    with pytest.raises(DomainError):
        maximal_family_subset([], FamilySpec("S", 1))


def test_greedy_blocks():
    assert greedy_blocks(tuple(range(4, 64)), 2) == [tuple(range(4, 8)), tuple(range(8, 16)), tuple(range(16, 32)), tuple(range(32, 64))]


@pytest.mark.parametrize("segments, mode, expected", [
    ([{3}, {4, 5}], "admissible", True),
    ([{4, 8}, {5, 9}, {6, 10}], "allowable", True),
    ([{4, 8}, {5, 9}, {6, 10}], "admissible", False),
    ([{2, 3}, {3, 4}], "allowable", False),
])
def test_admissibility_examples(segments, mode, expected):
    assert is_admissible(segments, FamilySpec("S", 1), mode) is expected


def test_admissibility_rejects_empty_segment():
    with pytest.raises(DomainError):
        is_admissible([{3}, set()], FamilySpec("S", 1))


def test_max_weight_examples():
    quarter = {i: Fraction(1, 4) for i in range(4, 8)}
    assert max_weight_subfamily(range(4, 8), quarter, FamilySpec("S", 0)) == Fraction(1, 4)
    assert max_weight_subfamily(range(4, 8), quarter, FamilySpec("S", 1)) == 1


def test_max_weight_on_repeated_average_carrier():
    weights = {}
    for lo, hi, w in ((4, 8, 16), (8, 16, 32), (16, 32, 64), (32, 64, 128)):
        weights.update({i: Fraction(1, w) for i in range(lo, hi)})
    assert max_weight_subfamily(range(4, 64), weights, FamilySpec("S", 1)) == Fraction(1, 4)


@given(
    st.dictionaries(st.integers(1, 14), st.fractions(0, 3, max_denominator=6), min_size=1, max_size=10),
    st.sampled_from(["S0", "S1", "S2", "A2", "A3"]),
)
def test_max_weight_matches_exhaustive(weights, spec):
    family = FamilySpec.parse(spec)
    F = sorted(weights)
    assert max_weight_subfamily(F, weights, family) == max_weight_subfamily_exhaustive(F, weights, family)
