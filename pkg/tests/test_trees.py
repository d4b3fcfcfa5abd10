from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tsirelson.errors import DomainError, NotSchreierError
from tsirelson.trees import TreeFunctional, evaluate, evaluate_recursive, from_coefficients, g_intervals, tag_ord
from tsirelson.vectors import FinVector

leaf = TreeFunctional.leaf
node = TreeFunctional.node


def sample_tree():
    inner = node(Fraction(1, 4), [leaf(5), leaf(6, -1)], j=2)
    return node(Fraction(1, 2), [leaf(3), inner], j=1)


def test_evaluate_example():
    x = FinVector({3: 2, 5: 4, 6: 8})
    assert evaluate(sample_tree(), x) == Fraction(1, 2) * (2 + Fraction(1, 4) * (4 - 8))


def test_tags_and_orders():
    f = sample_tree()
    assert tag_ord(f, [0]) == (Fraction(1, 2), 1)
    assert tag_ord(f, [1, 1]) == (Fraction(1, 8), 2)
    assert tag_ord(f, []) == (1, 0)
    with pytest.raises(DomainError):
        tag_ord(f, [2])


def test_g_and_projection_nodes():
    f = TreeFunctional.g_op(from_coefficients(1, {i: 1 for i in range(2, 9)}, op="block"), (2, 4))
    assert f.coefficients() == FinVector({2: Fraction(1, 2), 3: Fraction(1, 2)})
    p = TreeFunctional.project(from_coefficients(Fraction(1, 2), {3: 1, 4: -1, 5: 1}), 4, 9)
    assert p.coefficients() == FinVector({4: Fraction(-1, 2), 5: Fraction(1, 2)})


@pytest.mark.parametrize("F", [(3,), (2, 3, 5, 6), (5, 4), ()])
def test_g_sets_rejected(F):
    with pytest.raises(NotSchreierError):
        g_intervals(F)


def test_bad_nodes():
    with pytest.raises(DomainError):
        leaf(0)
    with pytest.raises(DomainError):
        TreeFunctional(op="nonsense", weight=1)


def test_json_round_trip():
    f = TreeFunctional.g_op(TreeFunctional.project(sample_tree(), 3, 5), (2, 3))
    assert TreeFunctional.from_json(f.to_json()) == f


@st.composite
def trees(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return leaf(draw(st.integers(1, 12)), draw(st.sampled_from((1, -1))))
    kind = draw(st.sampled_from(("weighted", "weighted", "project", "g")))
    if kind == "project":
        lo = draw(st.integers(1, 12))
        return TreeFunctional.project(draw(trees(depth - 1)), lo, draw(st.integers(lo, 12)))
    if kind == "g":
        return TreeFunctional.g_op(draw(trees(depth - 1)), draw(st.sampled_from(((2, 5), (4, 5, 7, 10), (4, 12)))))
    children = draw(st.lists(trees(depth - 1), min_size=1, max_size=3))
    return node(draw(st.sampled_from((Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)))), children, op="block")


vectors = st.dictionaries(st.integers(1, 12), st.fractions(-4, 4, max_denominator=5), max_size=8).map(FinVector)


@given(trees(), vectors)
def test_two_evaluation_routes_agree(f, x):
    assert evaluate(f, x) == evaluate_recursive(f, x) == f.coefficients().dot(x)
