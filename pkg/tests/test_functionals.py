from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tsirelson.coding import HistoryCoder
from tsirelson.errors import DomainError, NotSchreierError
from tsirelson.functionals import (
    admi_check,
    g_operation,
    special_functional,
    special_w4_node,
    validate_dependent,
    validate_special_sequence_W4,
    validate_W,
    validate_W4,
    w4_fragment,
    weight_cut_nodes,
)
from tsirelson.parameters import admi_space, toy_space, toy_w4
from tsirelson.trees import TreeFunctional, from_coefficients
from tsirelson.verify import golden_pair, mutations
from tsirelson.vectors import FinVector

leaf = TreeFunctional.leaf
node = TreeFunctional.node


@pytest.fixture(scope="module")
def golden():
    trace, spec, cf = golden_pair()
    return trace, spec, cf


def test_validate_W_examples():
    spec = toy_space()
    good = node(Fraction(1, 4), [leaf(3), leaf(5, -1), leaf(4)], j=2)
    assert validate_W(good, spec).ok
    shared = node(Fraction(1, 4), [leaf(3), node(Fraction(1, 4), [leaf(3), leaf(6)], j=2)], j=2)
    report = validate_W(shared, spec)
    assert not report.ok and report.first_failure().detail["path"] == []


def test_golden_instance_passes(golden):
    trace, spec, cf = golden
    assert trace.ok
    for name in ("y*", "z*"):
        f = trace.functionals[name]
        cert = validate_dependent(f.children, (f.j - 1) // 2, f.intervals, f.blocks, cf, spec)
        assert cert.ok
        assert validate_W(f, spec, cf).ok


def test_each_mutation_fails_exactly_its_clause(golden):
    trace, spec, cf = golden
    table = mutations(trace.functionals["y*"], spec)
    assert len(table) == 5
    for clause, (members, j, intervals, blocks) in table.items():
        cert = validate_dependent(members, j, intervals, blocks, cf, spec)
        assert cert.report.failed() == [clause], clause


def test_mutated_tree_rejected_at_odd_node(golden):
    trace, spec, cf = golden
    f = trace.functionals["y*"]
    members, j, intervals, blocks = mutations(f, spec)["first weight"]
    bad = special_functional(members, j, intervals, blocks, spec)
    report = validate_W(bad, spec, cf)
    assert not report.ok and "first weight" in str(report.to_json())


def test_malformed_decomposition(golden):
    trace, spec, cf = golden
    f = trace.functionals["y*"]
    with pytest.raises(DomainError):
        validate_dependent(f.children, 1, f.intervals, f.blocks[:-1], cf, spec)


def test_g_operation_examples():
    f = FinVector({i: i for i in range(2, 11)})
    assert g_operation(f, (4, 6, 8, 10)) == FinVector({4: 2, 5: Fraction(5, 2), 8: 4, 9: Fraction(9, 2)})
    with pytest.raises(NotSchreierError):
        g_operation(f, (2, 3, 5, 6))
    assert g_operation(FinVector({12: 1}), (4, 6)) == FinVector()


@given(
    st.dictionaries(st.integers(1, 20), st.fractions(-3, 3, max_denominator=4), max_size=10).map(FinVector),
    st.integers(2, 8).flatmap(lambda lo: st.tuples(st.just(lo), st.lists(st.integers(lo + 1, 24), min_size=1, max_size=lo - 1, unique=True))),
)
def test_g_operation_is_halved_restriction(f, setup):
    lo, rest = setup
    F = sorted({lo, *rest})
    if len(F) % 2:
        F = F[:-1]
    if not F:
        return
    kept = [i for i in f.support if any(F[p] <= i < F[p + 1] for p in range(0, len(F), 2))]
    assert g_operation(f, F) == f.project(kept) * Fraction(1, 2)
    tree = from_coefficients(Fraction(1, 4), dict(f), op="block", j=2) if f.support else None
    if tree is not None:
        assert g_operation(tree, F).coefficients() == g_operation(tree.coefficients(), F)


def w4_instance():
    spec = toy_w4()
    coder = HistoryCoder(spec.params)
    f1 = from_coefficients(spec.theta(4), {2: 1, 3: 1}, op="block", j=4)
    t = coder.assign([(4, f1)])
    f2 = from_coefficients(spec.theta(t), {5: 1, 6: -1}, op="block", j=t)
    return spec, coder, f1, f2


def test_special_sequence_passes():
    spec, coder, f1, f2 = w4_instance()
    assert validate_special_sequence_W4([f1, f2], 1, spec, coder).ok
    assert validate_W4(special_w4_node([f1, f2], 1, spec), spec, coder).ok


def test_special_sequence_weight_ratio():
    spec = toy_w4()
    coder = HistoryCoder(spec.params)
    wide = from_coefficients(spec.theta(4), {2: 1, 3: 1, 4: 1, 5: 1}, op="block", j=4)
    coder.force([(4, wide)], 6)
    f2 = from_coefficients(spec.theta(6), {7: 1}, op="block", j=6)
    assert validate_special_sequence_W4([wide, f2], 1, spec, coder).failed() == ["weight ratios"]


def test_special_sequence_history_collision():
    spec, coder, f1, f2 = w4_instance()
    other = from_coefficients(spec.theta(4), {2: 1, 4: 1}, op="block", j=4)
    coder.force([(4, other)], f2.j)
    assert validate_special_sequence_W4([f1, f2], 1, spec, coder).failed() == ["history"]


def test_w4_fragment_members_validate():
    spec = toy_w4()
    fragment = w4_fragment(spec, [2, 3, 4, 5])
    assert fragment and all(validate_W4(f, spec).ok for f in fragment)
    assert all(validate_W4(g_operation(f, (2, 4)), spec).ok for f in fragment)


def three_levels():
    bottom_a = node(Fraction(1, 8), [leaf(4), leaf(5)], op="block")
    bottom_b = node(Fraction(1, 8), [leaf(9), leaf(10)], op="block")
    middle = node(Fraction(1, 4), [bottom_a, leaf(7)], op="block")
    return node(Fraction(1, 2), [middle, bottom_b], op="block")


def test_weight_cut_nodes():
    f = three_levels()
    assert weight_cut_nodes(f, Fraction(1, 16), (1, 20)) == []
    assert weight_cut_nodes(node(Fraction(1, 2), [leaf(3)], op="block"), Fraction(1, 2), (3, 3)) == [()]
    assert weight_cut_nodes(f, Fraction(1, 8), (1, 20)) == [(0, 0), (1,)]
    assert weight_cut_nodes(f, Fraction(1, 8), (9, 9)) == [(1,)]
    assert weight_cut_nodes(f, Fraction(1, 4), (4, 7)) == [(0,)]


def test_admi_examples():
    spec = admi_space()
    inner = node(Fraction(1, 2), [leaf(5), leaf(6)])
    f = node(Fraction(1, 2), [inner, leaf(8)])
    report = admi_check(f, 3, spec)
    assert report.ok and report.check("ord <= 2 log_{m_1} m_j").detail["max_ord"] == 2
    tiny = node(Fraction(1, 128), [leaf(5), leaf(6)])
    report = admi_check(tiny, 3, spec)
    assert report.ok and report.values["qualifying"] == 1
    with pytest.raises(DomainError):
        admi_check(f, 1, spec)
