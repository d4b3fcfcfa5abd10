from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tsirelson.errors import DomainError
from tsirelson.parameters import ParameterSystem, default_l, paper_parameters, toy_parameters


def test_paper_sequences():
    p = paper_parameters()
    assert p.m(1) == 2 and p.m(2) == 32
    assert p.s(1) == 15
    assert p.n(2) == 900


def test_paper_recurrences_against_big_integers():
    p = paper_parameters()
    m, n = 2, 4
    for j in range(1, 5):
        assert p.m(j) == m and p.n(j) == n
        m_next = m ** 5
        s = (m_next ** 3).bit_length() - 1
        assert p.s(j) == s
        m, n = m_next, 15 * s * n


def test_rho_paper_values():
    p = paper_parameters()
    assert p.rho_index(5) == 1 and p.rho(5) == default_l(900, Fraction(1, 1024)) == 910
    assert p.rho_index(6) == 2
    assert p.rho(6) == p.n(4) + 250


def test_rho_toy():
    assert toy_parameters().rho(2) == 2


@pytest.mark.parametrize("n, eps, expected", [(4, Fraction(1, 2), 5), (4, Fraction(1, 1024), 14), (1, Fraction(1, 3), 3)])
def test_default_l(n, eps, expected):
    assert default_l(n, eps) == expected


@pytest.mark.parametrize("eps", [Fraction(0), Fraction(1), Fraction(3, 2)])
def test_default_l_range(eps):
    with pytest.raises(DomainError):
        default_l(3, eps)


def test_zero_index_rejected():
    with pytest.raises(DomainError):
        paper_parameters().m(0)


def test_partition():
    p = toy_parameters()
    assert [k for k in range(1, 9) if p.in_L1(k)] == [1, 3, 5, 7]
    assert all(p.in_L2(k) != p.in_L1(k) for k in range(1, 20))
    listed = ParameterSystem("pow2", "identity", "identity", [2, 3])
    assert listed.in_L1(2) and not listed.in_L1(1) and listed.in_L1(5)


def test_json_round_trip():
    p = ParameterSystem("pow2", [1, 5, 9], "identity", "evens")
    q = ParameterSystem.from_json(p.to_json())
    assert [q.n(j) for j in (1, 2, 3)] == [1, 5, 9]
    assert q.in_L1(2) and q.to_json() == p.to_json()


@given(st.integers(1, 60), st.fractions(Fraction(1, 5000), Fraction(4999, 5000)))
def test_l_dominates_n(n, eps):
    assert default_l(n, eps) >= n


@given(st.integers(1, 400))
def test_rho_monotone(n):
    for p in (paper_parameters(), toy_parameters()):
        assert p.rho(n) <= p.rho(n + 1)
