from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tsirelson.errors import DomainError, LimitExceeded, UnsupportedRule
from tsirelson.norm import (
    brute_force_norm_oracle,
    check_standard_inequality,
    l1_allowable_constant,
    norm,
    norm_weight_restricted,
)
from tsirelson.parameters import a_toy, a_toy_two_levels, modified_tsirelson_toy, toy_space, tsirelson_toy
from tsirelson.trees import evaluate
from tsirelson.vectors import FinVector

e = FinVector.basis
ones = FinVector.ones
SPACES = [tsirelson_toy(), modified_tsirelson_toy(), a_toy(), a_toy_two_levels()]

vectors = st.dictionaries(
    st.integers(1, 10), st.fractions(-3, 3, max_denominator=4).filter(bool), min_size=1, max_size=5
).map(FinVector)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_tsirelson_half_interval(k):
    x = ones(range(k, 2 * k))
    assert norm(x, tsirelson_toy()).value == Fraction(k, 2)


@pytest.mark.parametrize("spec, x, expected", [
    (tsirelson_toy(), ones(range(4, 8)), 2),
    (a_toy(), ones(range(1, 4)), Fraction(3, 2)),
    (a_toy(), ones(range(1, 10)), Fraction(9, 4)),
    (a_toy_two_levels(), ones(range(1, 10)), Fraction(9, 4)),
    (modified_tsirelson_toy(), ones(range(4, 8)), 2),
])
def test_norm_examples(spec, x, expected):
    result = norm(x, spec)
    assert result.value == expected and result.exact
    assert evaluate(result.witness, x) == expected


@pytest.mark.parametrize("spec", SPACES)
def test_unit_vectors(spec):
    assert norm(e(7), spec).value == 1
    assert norm(FinVector(), spec).value == 0


def test_weight_restricted_examples():
    x = ones(range(1, 10))
    spec = a_toy_two_levels()
    assert norm_weight_restricted(x, spec, Fraction(1, 8)).value == Fraction(9, 4)
    assert norm_weight_restricted(x, spec, Fraction(1, 2)).value == 1
    assert norm_weight_restricted(e(4), spec, Fraction(1, 3)).value == 1
    with pytest.raises(DomainError):
        norm_weight_restricted(x, spec, 1)


def test_oracle_examples():
    assert brute_force_norm_oracle(ones(range(4, 8)), tsirelson_toy(), 3) == 2
    assert brute_force_norm_oracle(e(5), a_toy(), 1) == 1
    assert brute_force_norm_oracle(ones(range(1, 4)), tsirelson_toy(), 3) == 1
    with pytest.raises(LimitExceeded):
        brute_force_norm_oracle(ones(range(1, 30)), tsirelson_toy(), 3)


def test_standard_inequality_examples():
    report = check_standard_inequality(e(5), tsirelson_toy(), 1, [{5}])
    assert report.ok and report.values["lhs"] == Fraction(1, 2)
    report = check_standard_inequality(ones(range(4, 8)), tsirelson_toy(), 1, [{4}, {5}, {6}, {7}])
    assert report.ok and report.values["equality"]
    with pytest.raises(DomainError):
        check_standard_inequality(ones(range(1, 4)), tsirelson_toy(), 1, [{1}, {2}])


def test_l1_constant_examples():
    assert l1_allowable_constant([e(3), e(4)], tsirelson_toy()) == 2
    assert l1_allowable_constant([e(5)], tsirelson_toy()) == 1
    with pytest.raises(DomainError):
        l1_allowable_constant([e(3) + e(4), e(4)], tsirelson_toy())


def test_dependent_rules_need_candidates():
    with pytest.raises(UnsupportedRule):
        norm(ones(range(2, 5)), toy_space())
    result = norm(ones(range(2, 5)), toy_space(), candidates=[])
    assert result.lower_bound_only


def test_allowable_support_cap():
    with pytest.raises(LimitExceeded):
        norm(ones(range(3, 15)), modified_tsirelson_toy())


@given(vectors, st.sampled_from(SPACES))
def test_dynamic_program_matches_oracle(x, spec):
    if spec.name == "modified-tsirelson":
        return
    assert norm(x, spec).value == brute_force_norm_oracle(x, spec, max_depth=len(x))


@given(vectors, vectors, st.sampled_from(SPACES))
def test_triangle_inequality(x, y, spec):
    assert norm(x + y, spec).value <= norm(x, spec).value + norm(y, spec).value


@given(vectors, st.fractions(-4, 4, max_denominator=5), st.sampled_from(SPACES))
def test_homogeneity(x, lam, spec):
    assert norm(x * lam, spec).value == abs(lam) * norm(x, spec).value


@given(vectors, st.lists(st.booleans(), min_size=5, max_size=5), st.sampled_from(SPACES))
def test_sign_changes_and_projections(x, flags, spec):
    value = norm(x, spec).value
    flipped = FinVector({i: -v if f else v for (i, v), f in zip(x.items(), flags)})
    assert norm(flipped, spec).value == value
    kept = [i for i, f in zip(x.support, flags) if f]
    assert norm(x.project(kept), spec).value <= value
    assert x.linf() <= value <= x.l1()


@given(vectors, st.sampled_from(SPACES))
def test_witness_reevaluates(x, spec):
    result = norm(x, spec)
    assert evaluate(result.witness, x) == result.value


@given(vectors)
def test_restricted_norm_monotone_in_weight(x):
    spec = a_toy_two_levels()
    values = [norm_weight_restricted(x, spec, w).value for w in (Fraction(1, 16), Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))]
    assert values == sorted(values, reverse=True)
    assert values[0] == norm(x, spec).value
