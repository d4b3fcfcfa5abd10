from fractions import Fraction
import json

import pytest
from hypothesis import given, strategies as st

from tsirelson.coding import CodingFunction
from tsirelson.constructions import (
    CERTIFIED,
    REFUTED,
    ConstructionTrace,
    allowable_sum_check,
    build_dependent_pair,
    build_tight_witness,
    high_weight_check,
    least_jseq,
    ris_certify,
    ris_scc_check,
    ris_scc_family_check,
)
from tsirelson.errors import DomainError
from tsirelson.functionals import validate_dependent
from tsirelson.parameters import ParameterSystem, Rule, SpaceSpec, toy_space
from tsirelson.report import FAIL, HYPOTHESIS_NOT_MET, PASS
from tsirelson.trees import TreeFunctional, evaluate, from_coefficients
from tsirelson.verify import golden_pair
from tsirelson.vectors import FinVector, make_scc

e = FinVector.basis
leaf = TreeFunctional.leaf


def test_ris_support_growth():
    spec = toy_space()
    refuted = ris_certify([e(1) + e(2) + e(3), e(5)], [2, 3], 1, spec)
    assert refuted.status["support growth"] == REFUTED
    fine = ris_certify([e(1) + e(2), e(5)], [1, 3], 2, spec)
    assert fine.status["support growth"] == CERTIFIED and fine.certified


@given(st.lists(st.integers(1, 40), min_size=1, max_size=8, unique=True))
def test_unit_vectors_are_certified(indices):
    spec = toy_space()
    blocks = [e(i) for i in sorted(indices)]
    cert = ris_certify(blocks, least_jseq(blocks, spec), 1, spec)
    assert cert.certified


def test_ris_rejects_malformed_input():
    with pytest.raises(DomainError):
        ris_certify([e(3), e(2)], [1, 2], 1, toy_space())
    with pytest.raises(DomainError):
        ris_certify([e(2)], [1, 2], 1, toy_space())


def uniform_scc():
    return make_scc([e(i) for i in range(4, 10)], 1, Fraction(1, 3))


def test_allowable_sum_examples():
    spec = toy_space()
    x = uniform_scc()
    report = allowable_sum_check(x, 1, [leaf(6)], spec)
    assert report.verdict == PASS and report.values["lhs"] == Fraction(1, 4) and report.values["bound"] == 3
    empty = allowable_sum_check(x, 1, [], spec)
    assert empty.verdict == PASS and empty.values["lhs"] == 0
    # one leaf per carrier element is S_1-allowable but not S_0-allowable
    spread = allowable_sum_check(x, 1, [leaf(i) for i in (4, 5, 6, 7)], spec)
    assert spread.verdict == HYPOTHESIS_NOT_MET
    deeper = make_scc([e(i) for i in range(2, 12)], 2, Fraction(3, 4))
    report = allowable_sum_check(deeper, 1, [leaf(i) for i in (4, 5, 6, 7)], spec)
    assert report.verdict == PASS and report.values["lhs"] == Fraction(1, 2)


def test_allowable_sum_needs_certified_scc():
    bad = make_scc([e(i) for i in range(4, 10)], 1, Fraction(1, 4))
    with pytest.raises(DomainError):
        allowable_sum_check(bad, 1, [], toy_space())


def high_scc(j):
    return make_scc([e(i) for i in range(j, 3 * j)], 1, Fraction(1, 2))


def test_ris_scc_cases():
    spec = toy_space()
    x = high_scc(4)
    f = from_coefficients(Fraction(1, 4), {4: 1, 5: 1}, j=2)
    report = ris_scc_check(x, [6], 1, 2, f, spec)
    assert report.verdict == PASS and report.values["case"] == "s=j"
    assert report.values["lhs"] == Fraction(1, 4) * Fraction(2, 4)
    assert ris_scc_check(x, [6], 1, 2, leaf(4), spec).verdict == HYPOTHESIS_NOT_MET
    assert ris_scc_check(x, [4], 1, 2, f, spec).verdict == HYPOTHESIS_NOT_MET
    low = from_coefficients(Fraction(1, 2), {i: 1 for i in range(4, 8)}, j=1)
    report = ris_scc_check(x, [6], 1, 3, low, spec)
    assert report.values["case"] == "s<j" and report.values["bound"] == Fraction(14, 2 * 8)
    assert report.values["lhs"] == Fraction(1, 2) and report.verdict == PASS
    big = from_coefficients(Fraction(1, 8), {i: 1 for i in range(4, 8)}, j=3)
    report = ris_scc_check(x.scaled(64), [6], 1, 3, big, spec)
    assert report.values["case"] == "s=j" and report.values["lhs"] == 8 and report.verdict == FAIL


def test_ris_scc_family():
    spec = toy_space()
    x = high_scc(4)
    report = ris_scc_family_check(x, [8], 1, 5, 1, [leaf(4), leaf(5)], spec)
    assert report.values["lhs"] == 32 * Fraction(1, 4) * 2 and report.verdict == FAIL
    assert ris_scc_family_check(x, [8], 1, 5, 3, [leaf(4)], spec).verdict == HYPOTHESIS_NOT_MET


def test_high_weight():
    spec = toy_space()
    f = from_coefficients(Fraction(1, 4), {7: 1, 8: 1})
    report = high_weight_check(FinVector(), [9], 6, f, spec)
    assert report.verdict == PASS and report.values["lhs"] == 0
    tiny = from_coefficients(spec.theta(13), {7: 1})
    assert high_weight_check(FinVector(), [9], 6, tiny, spec).verdict == HYPOTHESIS_NOT_MET
    u = high_scc(7).scaled(spec.params.m(13))
    assert high_weight_check(u, [9], 5, f, spec).verdict == HYPOTHESIS_NOT_MET
    report = high_weight_check(u, [9], 6, f, spec)
    assert report.values["lhs"] == evaluate(f, u.vector)
    with pytest.raises(DomainError):
        high_weight_check(e(3), [9], 6, f, spec)


def test_golden_pair_trace():
    trace, spec, cf = golden_pair()
    assert trace.ok and trace.status == "complete"
    y, z = trace.functionals["y*"], trace.functionals["z*"]
    assert [m.j for m in y.children] == [m.j for m in z.children]
    assert y.intervals == z.intervals
    again = ConstructionTrace.from_json(json.loads(json.dumps(trace.to_json())))
    assert again.to_json() == trace.to_json()
    first, second = trace.revalidate(cf), again.revalidate(cf)
    assert first.ok and first.to_json() == second.to_json()


def test_changed_sigma_assignment_breaks_coded_weights():
    trace, spec, cf = golden_pair()
    data = cf.export()
    last = trace.sigma[-1]
    used = {t for _, t in data["assignments"]}
    replacement = next(t for t in range(last["value"] + 4, 10 ** 6, 4) if t not in used)
    data["assignments"] = [[seq, replacement if seq == last["history"] else t] for seq, t in data["assignments"]]
    changed = CodingFunction.load(data)
    report = trace.revalidate(changed)
    assert report.failed() and all("y*" in n or "z*" in n for n in report.failed())
    f = trace.functionals["y*"]
    cert = validate_dependent(f.children, (f.j - 1) // 2, f.intervals, f.blocks, changed, spec)
    assert cert.report.failed() == ["coded weights"]


def test_pair_needs_enough_blocks():
    spec = toy_space()
    cf = CodingFunction(spec.params)
    with pytest.raises(DomainError):
        build_dependent_pair([e(2)], [e(2)], 1, spec, cf)
    short = [e(i) for i in range(2, 6)]
    trace = build_dependent_pair(short, short, 1, spec, cf)
    assert trace.status == "partial" and trace.failure


def test_tight_witness_on_unit_basis():
    spec = toy_space()
    cf = CodingFunction(spec.params)
    trace = build_tight_witness([e(i) for i in range(2, 60)], 1, spec, cf)
    assert trace.ok
    assert evaluate(trace.functionals["x*"], trace.vectors["x"]) == 1
    assert trace.revalidate(cf).ok
    with pytest.raises(DomainError):
        build_tight_witness([], 1, spec, cf)


def test_forced_oversized_interval_block():
    # n_2 = 0 makes rho(2) = 0, so any later A_k with two intervals is too big
    params = ParameterSystem("pow2", lambda j: 0 if j == 2 else j, "identity", "odds", name="small-rho")
    spec = SpaceSpec(params, [Rule("allowable"), Rule("dependent")], name="small-rho")
    blocks = [e(i) for i in range(2, 120)]
    trace = build_tight_witness(blocks, 1, spec, CodingFunction(params), inner_degree_override={(1, 2): 1})
    failed = [c["name"] for c in trace.certificates["x* dependent"]["checks"] if c["ok"] is False]
    assert failed == ["interval blocks"]
    assert "x* members dependent" in trace.checks.failed()
    plain = build_tight_witness(blocks, 1, spec, CodingFunction(params))
    assert "x* members dependent" not in plain.checks.failed()
