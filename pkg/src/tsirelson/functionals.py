"""Validation of tree functionals against the closure rules.

Every validator returns a :class:`~tsirelson.report.Report`; the only
exceptions raised are :class:`DomainError` for malformed input data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .coding import CodingFunction, HistoryCoder, as_interval_sequence
from .errors import DomainError
from .families import FamilySpec, family_member
from .parameters import SpaceSpec
from .report import Report
from .trees import Path, TreeFunctional, g_intervals, in_g_set, tag_ord
from .vectors import FinVector

# ---------------------------------------------------------------------------
# Dependent sequences


def _blocks_layout(members, intervals, blocks) -> list[list[tuple[int, ...]]]:
    if blocks is None or intervals is None:
        raise DomainError("dependent sequence needs its intervals and A_k blocks")
    if len(blocks) != len(members):
        raise DomainError(f"{len(members)} members but {len(blocks)} block lists")
    flat: list[int] = []
    out = []
    for i, (member, member_blocks) in enumerate(zip(members, blocks)):
        if member.is_leaf or member.op not in ("allowable", "block"):
            raise DomainError(f"member {i + 1} must be a weighted operation node")
        if len(member_blocks) != len(member.children):
            raise DomainError(f"member {i + 1} has {len(member.children)} children but {len(member_blocks)} blocks")
        if not member_blocks:
            raise DomainError(f"member {i + 1} has no inner functionals")
        rows = []
        for A in member_blocks:
            A = tuple(int(r) for r in A)
            if not A or any(b != a + 1 for a, b in zip(A, A[1:])):
                raise DomainError(f"A_k must be a non-empty run of consecutive indices, got {list(A)}")
            flat.extend(A)
            rows.append(A)
        out.append(rows)
    if flat != list(range(1, len(intervals) + 1)):
        raise DomainError("the A_k must tile 1..R in order, R = number of intervals")
    return out


@dataclass
class DependentCertificate:
    j: int
    members: list[TreeFunctional]
    intervals: tuple[tuple[int, int], ...]
    blocks: list[list[tuple[int, ...]]]
    report: Report
    histories: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.report.ok

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "intervals": [list(e) for e in self.intervals],
            "blocks": [[list(a) for a in row] for row in self.blocks],
            "members": [m.to_json() for m in self.members],
            "histories": self.histories,
            "report": self.report.to_json(),
        }


def validate_dependent(
    members: Sequence[TreeFunctional],
    j: int,
    intervals,
    blocks,
    cf: CodingFunction,
    spec: SpaceSpec,
) -> DependentCertificate:
    """Check that ``members`` form a ``(2j+1)``-dependent sequence.

    ``members[i]`` is ``m_{2j_i}^{-1} sum_k f_{i,k}`` as a weighted node whose
    index is ``2 j_i``; ``blocks[i][k]`` lists the interval indices ``A_k``
    (1-based, concatenated in order).  ``cf`` is only read, never extended.
    """
    members = list(members)
    if not members:
        raise DomainError("a dependent sequence needs at least one member")
    if j < 0:
        raise DomainError("j must be >= 0")
    params = spec.params
    E = as_interval_sequence(intervals)
    layout = _blocks_layout(members, E, blocks)
    odd = 2 * j + 1
    op = spec.rule_matching("dependent", odd)
    family = op.family if op is not None else FamilySpec("S", params.n(odd))
    report = Report("dependent-sequence")
    report.values.update({"j": j, "family": str(family), "members": len(members)})

    # the members themselves
    live = [m for m in members if m.support]
    successive = all(a.support[-1] < b.support[0] for a, b in zip(live, live[1:]))
    mins = [m.support[0] for m in live]
    report.add(
        "admissible",
        successive and family_member(mins, family),
        successive=successive,
        mins=mins,
        family=str(family),
    )

    # each member is m_{2j_i}^{-1} (sum of its children)
    bad_form = [
        i + 1 for i, m in enumerate(members) if m.j is None or m.j % 2 or m.weight != spec.theta(m.j)
    ]
    report.add("form", not bad_form, members=bad_form)

    # first weight is free but large
    t1 = members[0].j
    if t1 is None or t1 % 2:
        report.add("first weight", False, reason="first weight index is not even", index=t1)
    else:
        j1 = t1 // 2
        ok = params.in_L1(j1) and params.m(t1) > params.n(odd)
        report.add("first weight", ok, j1=j1, j1_in_L1=params.in_L1(j1), m=params.m(t1), n=params.n(odd))

    # later weights are coded by the interval history
    histories = []
    failures = []
    end = 0
    for i in range(len(members) - 1):
        end += sum(len(A) for A in layout[i])
        history = E[:end]
        coded = cf.lookup(history)
        histories.append({"member": i + 2, "history": [list(e) for e in history], "sigma": coded})
        if coded is None or coded != members[i + 1].j:
            failures.append({"member": i + 2, "expected": coded, "found": members[i + 1].j})
    report.add("coded weights", not failures, failures=failures)

    # inner functionals live on their intervals
    failures = []
    for i, member in enumerate(members):
        for k, (child, A) in enumerate(zip(member.children, layout[i])):
            cover = [E[r - 1] for r in A]
            outside = [p for p in child.support if not any(lo <= p <= hi for lo, hi in cover)]
            if outside:
                failures.append({"member": i + 1, "k": k + 1, "outside": outside})
    report.add("supports inside intervals", not failures, failures=failures)

    # first block is a single interval, later blocks admissible at level rho
    failures = []
    for i, rows in enumerate(layout):
        if len(rows[0]) != 1:
            failures.append({"member": i + 1, "k": 1, "reason": "A_min K is not a singleton", "A": list(rows[0])})
        for k in range(1, len(rows)):
            level = params.rho(E[rows[k - 1][-1] - 1][1])
            starts = [E[r - 1][0] for r in rows[k]]
            if not family_member(starts, FamilySpec("S", level)):
                failures.append({"member": i + 1, "k": k + 1, "reason": f"not S_{level}-admissible", "A": list(rows[k])})
    report.add("interval blocks", not failures, failures=failures)
    report.finish()
    return DependentCertificate(j, members, E, layout, report, histories)


def special_functional(
    members: Sequence[TreeFunctional], j: int, intervals, blocks, spec: SpaceSpec
) -> TreeFunctional:
    """``m_{2j+1}^{-1} sum_i f_i`` carrying its defining data."""
    return TreeFunctional(
        op="dependent",
        weight=spec.theta(2 * j + 1),
        j=2 * j + 1,
        children=tuple(members),
        intervals=tuple(tuple(e) for e in intervals),
        blocks=tuple(tuple(tuple(a) for a in row) for row in blocks),
    )


# ---------------------------------------------------------------------------
# Whole-tree validation


def _children_ok(node: TreeFunctional, family: FamilySpec, mode: str) -> tuple[bool, str]:
    live = [c for c in node.children if c.support]
    if mode == "allowable":
        seen: set[int] = set()
        for c in live:
            if seen.intersection(c.support):
                return False, "children are not disjointly supported"
            seen.update(c.support)
        mins = sorted(c.support[0] for c in live)
    else:
        if any(a.support[-1] >= b.support[0] for a, b in zip(live, live[1:])):
            return False, "children are not successive"
        mins = [c.support[0] for c in live]
    if not family_member(mins, family):
        return False, f"minima {mins} not in {family}"
    return True, ""


def _check_node(node, spec, cf, coder, allowed) -> tuple[bool, str, dict]:
    if node.is_leaf:
        return True, "", {}
    if node.op not in allowed:
        return False, f"operation {node.op} is not a rule of this norming set", {}
    if node.op == "projection":
        return True, "", {}
    if node.op == "g-op":
        return True, "", {}  # F is validated on construction
    op = spec.rule_matching(node.op, node.j)
    if op is None:
        return False, f"no {node.op} rule with index {node.j}", {}
    if node.weight != op.theta:
        return False, f"weight {node.weight} differs from {op.theta}", {}
    if node.op == "dependent":
        if cf is None:
            return False, "dependent node needs a coding function", {}
        try:
            cert = validate_dependent(node.children, (node.j - 1) // 2, node.intervals, node.blocks, cf, spec)
        except DomainError as exc:
            return False, f"malformed dependent data: {exc}", {}
        if not cert.ok:
            return False, f"dependent sequence fails {cert.report.failed()}", {"certificate": cert.report.to_json()}
        return True, "", {}
    if node.op == "special-w4":
        if len(node.children) > op.family.index:
            return False, f"{len(node.children)} members exceed n_{node.j} = {op.family.index}", {}
        rep = validate_special_sequence_W4(node.children, (node.j - 1) // 2, spec, coder)
        if not rep.ok:
            return False, f"special sequence fails {rep.failed()}", {"report": rep.to_json()}
        return True, "", {}
    ok, why = _children_ok(node, op.family, op.mode)
    return ok, why, {}


def validate(
    f: TreeFunctional,
    spec: SpaceSpec,
    cf: CodingFunction | None = None,
    coder: HistoryCoder | None = None,
    allowed: Iterable[str] | None = None,
) -> Report:
    """Check every node of ``f`` against the rules of ``spec``; reports the first failing path."""
    allowed = set(allowed) if allowed is not None else {r.kind for r in spec.rules} | {"projection"}
    report = Report("tree-validation")
    checked = 0
    for path, node in f.walk():
        ok, why, extra = _check_node(node, spec, cf, coder, allowed)
        checked += 1
        if not ok:
            report.add("node", False, path=list(path), reason=why, **extra)
            report.values["first_failing_path"] = list(path)
            return report.finish()
    report.add("all nodes", True, nodes=checked)
    return report.finish()


def validate_W(f: TreeFunctional, spec: SpaceSpec, cf: CodingFunction | None = None) -> Report:
    return validate(f, spec, cf=cf, allowed={"allowable", "block", "dependent", "projection"})


def validate_W4(f: TreeFunctional, spec: SpaceSpec, coder: HistoryCoder | None = None) -> Report:
    return validate(f, spec, coder=coder, allowed={"block", "special-w4", "g-op", "projection"})


# ---------------------------------------------------------------------------
# Interval/G-operation space


def g_operation(f, F: Sequence[int]):
    """``(1/2) * chi_{[F_1,F_2) ∪ [F_3,F_4) ∪ ...} f`` for a Schreier set ``F`` of even size.

    ``f`` may be a coefficient vector or a :class:`TreeFunctional`; the result
    has the same type.
    """
    pieces = g_intervals(F)
    if isinstance(f, TreeFunctional):
        return TreeFunctional.g_op(f, F)
    f = f if isinstance(f, FinVector) else FinVector(f)
    return FinVector({i: v / 2 for i, v in f.items() if in_g_set(i, pieces)})


def validate_special_sequence_W4(
    fs: Sequence[TreeFunctional], j: int, spec: SpaceSpec, coder: HistoryCoder | None
) -> Report:
    params = spec.params
    fs = list(fs)
    odd = 2 * j + 1
    report = Report("special-sequence-w4")
    live = [f for f in fs if f.support]
    report.add("successive", all(a.support[-1] < b.support[0] for a, b in zip(live, live[1:])))
    report.add("length", 1 <= len(fs) <= params.n(odd), length=len(fs), limit=params.n(odd))

    idx = [f.j for f in fs]
    if any(f.is_leaf or t is None or t % 2 or f.weight != spec.theta(t) for f, t in zip(fs, idx)):
        report.add("weight growth", False, reason="every member needs weight 1/m_{2j_i} with an even index")
    else:
        js = [t // 2 for t in idx]
        ms = [params.m(t) for t in idx]
        parts = params.in_L1(js[0]) and all(params.in_L2(x) for x in js[1:])
        chain = [params.n(odd)] + ms
        report.add("weight growth", parts and all(a < b for a, b in zip(chain, chain[1:])), indices=idx)

    failures = []
    for i in range(len(fs) - 1):
        if fs[i].is_leaf or idx[i] is None or idx[i + 1] is None or not fs[i].support:
            continue
        if not params.m(idx[i + 1]) > fs[i].support[-1] * params.m(idx[i]):
            failures.append(i + 1)
    report.add("weight ratios", not failures, failures=failures)

    if coder is None:
        report.add("history", None, reason="no history table supplied")
    else:
        failures = []
        for i in range(1, len(fs)):
            history = [(idx[k], fs[k]) for k in range(i)]
            coded = coder.lookup(history)
            owners = coder.histories_for(idx[i]) if idx[i] is not None else []
            if coded != idx[i] or len(owners) != 1:
                failures.append({"member": i + 1, "coded": coded, "found": idx[i], "histories": len(owners)})
        report.add("history", not failures, failures=failures)
    return report.finish()


def special_w4_node(fs: Sequence[TreeFunctional], j: int, spec: SpaceSpec) -> TreeFunctional:
    return TreeFunctional.node(spec.theta(2 * j + 1), fs, op="special-w4", j=2 * j + 1)


def w4_fragment(spec: SpaceSpec, support: Sequence[int]) -> list[TreeFunctional]:
    """Small members of the interval/G-operation norming set over ``support``.

    Signed leaves, one block operation per weight on every run of
    consecutive leaves it accepts, and the interval projections of those.
    """
    support = sorted(support)
    out: list[TreeFunctional] = [TreeFunctional.leaf(i, s) for i in support for s in (1, -1)]
    nodes = []
    for op in spec.operations(kinds=("block",), support_size=len(support)):
        for start in range(len(support)):
            for stop in range(start + 1, min(len(support), start + op.family.index) + 1):
                kids = [TreeFunctional.leaf(i) for i in support[start:stop]]
                nodes.append(TreeFunctional.node(op.theta, kids, op="block", j=op.j))
    out.extend(nodes)
    for f in nodes:
        lo, hi = f.support[0], f.support[-1]
        if hi > lo:
            out.append(TreeFunctional.project(f, lo + 1, hi))
    return out


# ---------------------------------------------------------------------------
# Tree-analysis selections


def weight_cut_nodes(f: TreeFunctional, threshold, rng) -> list[Path]:
    """Minimal weighted nodes with ``w <= threshold`` whose support meets ``rng``.

    ``rng`` is a closed interval ``(lo, hi)``.  Leaves carry no weight and are
    never selected.  The result is an antichain in pre-order.
    """
    threshold = Fraction(threshold)
    lo, hi = rng
    out: list[Path] = []

    def visit(node: TreeFunctional, path: Path):
        weighted = not node.is_leaf and node.op != "projection"
        if weighted and node.weight <= threshold and any(lo <= i <= hi for i in node.support):
            out.append(path)
            return
        for pos, child in enumerate(node.children):
            visit(child, path + (pos,))

    visit(f, ())
    return out


def _maximal_antichains(f: TreeFunctional, qualifying: set[Path], path: Path = (), cap: int = 200000):
    node = f.node_at(path)
    kids = [path + (p,) for p in range(len(node.children)) if path + (p,) in qualifying]
    yield [path]
    if not kids:
        return
    options = [list(_maximal_antichains(f, qualifying, k, cap)) for k in kids]
    count = math.prod(len(o) for o in options)
    if count > cap:
        raise DomainError(f"too many antichains ({count}) to enumerate")
    stack: list[list[Path]] = [[]]
    for opts in options:
        stack = [acc + choice for acc in stack for choice in opts]
    yield from stack


def admi_check(f: TreeFunctional, j: int, spec: SpaceSpec) -> Report:
    """Order and allowability bounds for the nodes of large tag under small-index weights.

    The qualifying set is closed under taking ancestors, and the families are
    hereditary, so checking the maximal antichains covers every antichain.
    """
    if j < 2:
        raise DomainError("the bound concerns j >= 2")
    params = spec.params
    mj, m1, prev = params.m(j), params.m(1), Fraction(1, params.m(j - 1))
    bound = Fraction(1, mj * mj)
    qualifying: set[Path] = set()
    ords = []
    for path, node in f.walk():
        tag, order = tag_ord(f, path)
        ancestors_ok = all(f.node_at(path[:d]).multiplier >= prev for d in range(len(path)))
        if tag > bound and ancestors_ok:
            qualifying.add(path)
            ords.append(order)
    report = Report("admi")
    level = -(-params.n(j) // 5)
    report.values.update({"qualifying": len(qualifying), "allowability_level": level})
    worst = max(ords, default=0)
    report.add("ord <= 2 log_{m_1} m_j", m1 ** worst <= mj * mj, max_ord=worst, m1=m1, mj=mj)
    report.add("ord <= m_j", worst <= mj, max_ord=worst)
    failures = []
    checked = 0
    if qualifying:
        family = FamilySpec("S", level)
        for chain in _maximal_antichains(f, qualifying):
            checked += 1
            supports = [f.node_at(p).support for p in chain]
            supports = [s for s in supports if s]
            flat = [i for s in supports for i in s]
            disjoint = len(flat) == len(set(flat))
            if not disjoint or not family_member(sorted(s[0] for s in supports), family):
                failures.append([list(p) for p in chain])
                break
    report.add("antichains allowable", not failures, antichains=checked, first_failure=failures[:1])
    return report.finish()
