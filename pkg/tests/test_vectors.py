from fractions import Fraction
import itertools

import pytest
from hypothesis import given, strategies as st

from tsirelson.errors import CarrierExhausted, DomainError
from tsirelson.families import FamilySpec, family_member
from tsirelson.vectors import FinVector, Interval, check_basic_scc, greedy_carrier, make_scc, repeated_average

e = FinVector.basis


def test_projection_examples():
    assert (e(3) + e(5)).project({5}) == e(5)
    assert (e(3) + e(5)).project(set()) == FinVector()
    assert (e(3) + e(5) + e(9)).project(Interval(4, 9)) == e(5) + e(9)


def test_json_forms():
    x = FinVector({2: Fraction(1, 3), 7: -1})
    assert FinVector.from_json(x.to_json()) == x
    assert FinVector.from_json({"2": "1/3", "7": "-1"}) == x
    assert FinVector.from_json([[2, "1/3"], [7, -1]]) == x


def test_repeated_average_examples():
    assert repeated_average(itertools.count(4), 1) == FinVector({i: Fraction(1, 4) for i in range(4, 8)})
    assert repeated_average(itertools.count(7), 0) == e(7)
    x = repeated_average(itertools.count(4), 2)
    for lo, hi, d in ((4, 8, 16), (8, 16, 32), (16, 32, 64), (32, 64, 128)):
        assert all(x[i] == Fraction(1, d) for i in range(lo, hi))
    assert x.support == tuple(range(4, 64))


def test_repeated_average_needs_long_enough_stream():
    with pytest.raises(CarrierExhausted):
        repeated_average([4, 5, 6], 1)


def test_scc_boundary():
    x = FinVector({i: Fraction(1, 4) for i in range(4, 8)})
    cert = check_basic_scc(x, 1, Fraction(1, 3))
    assert cert.ok and cert.smallness == Fraction(1, 4)
    cert = check_basic_scc(x, 1, Fraction(1, 4))
    assert not cert.ok and cert.violations == ["smallness not below eps"]


def test_scc_degenerate_level():
    cert = check_basic_scc(e(5), 0, Fraction(1, 2))
    assert cert.ok and cert.smallness == 0


def test_scc_negative_coefficient():
    with pytest.raises(DomainError):
        check_basic_scc(FinVector({4: 1, 5: -1}), 1, Fraction(1, 2))


def test_make_scc_examples():
    blocks = [e(i) for i in range(4, 10)]
    scc = make_scc(blocks, 1, Fraction(1, 3))
    assert scc.vector == FinVector({i: Fraction(1, 4) for i in range(4, 8)}) and scc.certificate.ok
    single = make_scc([e(3) + e(4)], 0, Fraction(1, 2))
    assert single.coeffs == (1,) and single.vector == e(3) + e(4)
    with pytest.raises(DomainError):
        make_scc([e(3) + e(5), e(4)], 1, Fraction(1, 2))


def test_scc_json_round_trip():
    scc = make_scc([e(2 * i) + e(2 * i + 1) for i in range(4, 12)], 1, Fraction(1, 3))
    assert scc.to_json() == type(scc).from_json(scc.to_json()).to_json()


@given(st.one_of(st.tuples(st.integers(1, 12), st.integers(0, 1)), st.tuples(st.integers(1, 5), st.just(2))))
def test_repeated_average_is_an_scc(case):
    start, n = case
    x = repeated_average(itertools.count(start), n)
    assert sum(x.values()) == 1
    assert all(v > 0 for v in x.values())
    if start & (start - 1) == 0:
        assert all(v.denominator & (v.denominator - 1) == 0 for v in x.values())
    eps = check_basic_scc(x, n, 1).smallness + Fraction(1, start)
    assert check_basic_scc(x, n, eps).ok
    assert family_member(x.support, FamilySpec("S", n))


@given(st.integers(2, 5), st.lists(st.integers(0, 3), min_size=12, max_size=12), st.lists(st.integers(1, 3), min_size=12, max_size=12))
def test_certificate_depends_only_on_minima(start, gaps, widths):
    plain, wide, pos = [], [], start
    for g, w in zip(gaps, widths):
        pos += g
        plain.append(e(pos))
        wide.append(FinVector({pos + k: k + 1 for k in range(w)}))
        pos += w
    a = make_scc(plain, 1, Fraction(1, 2)).certificate
    b = make_scc(wide, 1, Fraction(1, 2)).certificate
    assert a.to_json() == b.to_json()


def test_greedy_carrier():
    assert greedy_carrier(itertools.count(3), 1) == (3, 4, 5)
