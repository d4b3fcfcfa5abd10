"""Rapidly increasing sequences, the paired and tight constructions, and
desk-scale checkers for the quantitative lemmas.

The builders work on finite pieces only.  They assemble three levels
(inner normalised sccs, middle scaled sccs, an outer scaled scc), code the
weights of the middle level with a :class:`CodingFunction`, and attach every
certificate needed to re-check the result from its JSON form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .coding import CodingFunction
from .errors import CarrierExhausted, DomainError, LimitExceeded
from .families import FamilySpec, FamilyTracker, family_member
from .functionals import special_functional, validate_dependent, validate_W
from .norm import norm, root_values
from .parameters import SpaceSpec
from .rational import fmt
from .report import FAIL, HYPOTHESIS_NOT_MET, PASS, Report
from .trees import TreeFunctional, evaluate, evaluate_recursive
from .vectors import FinVector, Scc, check_basic_scc, is_block_sequence, make_scc

CERTIFIED = "certified"
REFUTED = "refuted"
UNKNOWN = "unknown"

# ---------------------------------------------------------------------------
# Rapidly increasing sequences


@dataclass
class RisCertificate:
    blocks: list[FinVector]
    jseq: list[int]
    C: Fraction
    status: dict[str, str]
    details: dict[str, list] = field(default_factory=dict)
    witness: TreeFunctional | None = None

    @property
    def certified(self) -> bool:
        return all(v == CERTIFIED for v in self.status.values())

    def to_json(self) -> dict:
        out = {
            "jseq": list(self.jseq),
            "C": fmt(self.C),
            "status": dict(self.status),
            "details": self.details,
            "blocks": [b.to_json() for b in self.blocks],
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def least_jseq(blocks: Sequence[FinVector], spec: SpaceSpec, start: int = 1) -> list[int]:
    """Smallest strictly increasing indices with ``maxsupp x_k <= m_{j_{k+1}} / m_{j_k}``."""
    params = spec.params
    out = [start]
    for b in blocks[:-1]:
        j = out[-1] + 1
        while params.m(j) < b.maxsupp * params.m(out[-1]):
            j += 1
        out.append(j)
    return out


def _fragment_norm(x: FinVector, spec: SpaceSpec, budget=None):
    kw = {"budget": budget}
    if spec.has_undecidable_rules():
        kw["candidates"] = ()
    return norm(x, spec, **kw)


def ris_certify(blocks: Sequence[FinVector], jseq: Sequence[int], C, spec: SpaceSpec, budget=None) -> RisCertificate:
    """Check a block sequence against the two growth conditions and the norm bound.

    Condition (2) is certified outright when ``||x_k||_1 <= C``, since a
    functional of weight ``w`` never exceeds ``w ||x||_1``.  Otherwise each
    decidable operation of weight above ``1/m_{j_k}`` is checked at the root;
    operations past the truncation index share the last index's family trace
    on ``supp x_k`` and only carry a smaller weight, so the ratio test at the
    last index covers them.
    """
    blocks = list(blocks)
    jseq = [int(j) for j in jseq]
    C = Fraction(C)
    if not blocks or len(jseq) != len(blocks):
        raise DomainError("need one index per block")
    if not is_block_sequence(blocks):
        raise DomainError("blocks must be non-zero and successive")
    if any(a >= b for a, b in zip(jseq, jseq[1:])) or jseq[0] < 1:
        raise DomainError("jseq must be strictly increasing positive integers")
    params = spec.params
    undecidable = spec.has_undecidable_rules()
    status: dict[str, str] = {}
    details: dict[str, list] = {"support growth": [], "weighted evaluations": [], "norm": []}
    witness = None

    ok1 = True
    for k in range(len(blocks) - 1):
        bound = Fraction(params.m(jseq[k + 1]), params.m(jseq[k]))
        good = blocks[k].maxsupp <= bound
        ok1 &= good
        details["support growth"].append({"k": k + 1, "maxsupp": blocks[k].maxsupp, "bound": fmt(bound), "ok": good})
    status["support growth"] = CERTIFIED if ok1 else REFUTED

    norm_status = CERTIFIED
    cond2 = CERTIFIED
    for k, x in enumerate(blocks):
        if x.l1() <= C:
            details["norm"].append({"k": k + 1, "route": "l1", "l1": fmt(x.l1())})
            details["weighted evaluations"].append({"k": k + 1, "route": "l1"})
            continue
        try:
            res = _fragment_norm(x, spec, budget)
            roots = root_values(x, spec, budget)
        except LimitExceeded as exc:
            details["norm"].append({"k": k + 1, "route": "budget", "reason": str(exc)})
            norm_status = norm_status if norm_status == REFUTED else UNKNOWN
            cond2 = cond2 if cond2 == REFUTED else UNKNOWN
            continue
        if res.value > C:
            norm_status = REFUTED
        elif not res.exact and norm_status == CERTIFIED:
            norm_status = UNKNOWN
        details["norm"].append({"k": k + 1, "route": "norm", "value": fmt(res.value), "exact": res.exact})
        floor = Fraction(1, params.m(jseq[k]))
        for op, value, w in roots:
            if op.theta <= floor:
                continue
            if value > C * op.theta:
                cond2 = REFUTED
                witness = witness or w
                details["weighted evaluations"].append({"k": k + 1, "op": f"{op.kind} j={op.j}", "value": fmt(value), "bound": fmt(C * op.theta)})
        if (undecidable or not res.exact) and cond2 == CERTIFIED:
            cond2 = UNKNOWN
    status["norm"] = norm_status
    status["weighted evaluations"] = cond2
    return RisCertificate(blocks, jseq, C, status, details, witness)


# ---------------------------------------------------------------------------
# Bound checkers


def _verdict(report: Report, lhs: Fraction, bound: Fraction, **extra) -> Report:
    report.values.update({"lhs": lhs, "bound": bound, **extra})
    report.add("lhs <= bound", lhs <= bound, lhs=lhs, bound=bound)
    report.verdict = PASS if lhs <= bound else FAIL
    return report


def _not_met(report: Report, why: str) -> Report:
    report.add("hypotheses", None, reason=why)
    report.verdict = HYPOTHESIS_NOT_MET
    return report


def _evaluate_both(f: TreeFunctional, x: FinVector) -> Fraction:
    a, b = evaluate(f, x), evaluate_recursive(f, x)
    if a != b:  # two independent evaluation routes; a mismatch is a bug
        raise AssertionError(f"evaluation routes disagree: {a} vs {b}")
    return a


def _allowable(fs: Sequence[TreeFunctional], family: FamilySpec) -> bool:
    seen: set[int] = set()
    mins = []
    for f in fs:
        supp = f.support
        if not supp:
            continue
        if seen.intersection(supp):
            return False
        seen.update(supp)
        mins.append(supp[0])
    return family_member(sorted(mins), family)


def allowable_sum_check(x: Scc, C, family: Sequence[TreeFunctional], spec: SpaceSpec) -> Report:
    """``sum_p f_p(x) <= 3C`` for an ``S_{n-1}``-allowable family and an ``(n, eps)``-scc ``x``."""
    C = Fraction(C)
    report = Report("allowable-sum")
    if not x.certificate.ok:
        raise DomainError(f"x is not a certified scc: {x.certificate.violations}")
    for b in x.blocks:
        if b.l1() > C and _fragment_norm(b, spec).value > C:
            raise DomainError("a block of x has norm above C")
    n = x.certificate.n
    if not _allowable(family, FamilySpec("S", max(n - 1, 0))):
        return _not_met(report, f"family is not S_{max(n - 1, 0)}-allowable")
    vec = x.vector
    lhs = sum((_evaluate_both(f, vec) for f in family), Fraction(0))
    return _verdict(report, lhs, 3 * C, members=len(family))


def _weight_index(f: TreeFunctional, spec: SpaceSpec) -> int | None:
    if f.j is not None and spec.theta(f.j) == f.weight:
        return f.j
    for s in range(1, 64):
        if spec.theta(s) == f.weight:
            return s
        if spec.theta(s) < f.weight:
            return None
    return None


def ris_scc_check(x: Scc, jseq: Sequence[int], C, j: int, f: TreeFunctional, spec: SpaceSpec) -> Report:
    """Case bound on ``|f(x)|`` for an scc of a RIS, selected by the weight of ``f``."""
    C = Fraction(C)
    report = Report("ris-scc")
    params = spec.params
    if f.is_leaf or f.op in ("projection", "g-op"):
        return _not_met(report, "f carries no weight")
    if not jseq or not j + 2 < jseq[0]:
        return _not_met(report, "needs j + 2 < j_1")
    if not x.certificate.ok:
        return _not_met(report, "x is not a certified scc")
    s = _weight_index(f, spec)
    if s is None:
        return _not_met(report, f"weight {f.weight} is not of the form 1/m_s")
    mj = params.m(j)
    if s < j:
        bound, case = 14 * C / (params.m(s) * mj), "s<j"
    elif s == j:
        bound, case = 8 * C / mj, "s=j"
    else:
        bound, case = 8 * C / (mj * mj), "s>j"
    lhs = abs(_evaluate_both(f, x.vector))
    return _verdict(report, lhs, bound, case=case, s=s)


def ris_scc_family_check(x: Scc, jseq: Sequence[int], C, j: int, s: int, family: Sequence[TreeFunctional], spec: SpaceSpec) -> Report:
    """``sum_a f_a(m_j x) <= 14C`` for an ``S_{n_{2s}}``-allowable family with ``2s < j``."""
    C = Fraction(C)
    report = Report("ris-scc-family")
    params = spec.params
    if not jseq or not j + 2 < jseq[0]:
        return _not_met(report, "needs j + 2 < j_1")
    if not 2 * s < j:
        return _not_met(report, "needs 2s < j")
    if not x.certificate.ok:
        return _not_met(report, "x is not a certified scc")
    if not _allowable(family, FamilySpec("S", params.n(2 * s))):
        return _not_met(report, f"family is not S_{params.n(2 * s)}-allowable")
    scaled = x.vector * params.m(j)
    lhs = sum((_evaluate_both(f, scaled) for f in family), Fraction(0))
    return _verdict(report, lhs, 14 * C, members=len(family))


def high_weight_check(u, jseq: Sequence[int], j: int, f: TreeFunctional, spec: SpaceSpec) -> Report:
    """``f(u) <= 1/m_{2j}`` when every weight in the tree of ``f`` exceeds ``1/m_{2j+1}``.

    ``u`` is a scaled :class:`Scc` or the zero vector.
    """
    report = Report("high-weight")
    params = spec.params
    bound = Fraction(1, params.m(2 * j))
    floor = Fraction(1, params.m(2 * j + 1))
    low = [list(p) for p, node in f.walk() if not node.is_leaf and node.op != "projection" and node.weight <= floor]
    if low:
        return _not_met(report, f"nodes {low[:3]} have weight <= 1/m_(2j+1)")
    if isinstance(u, Scc):
        if not j > 5:
            return _not_met(report, "needs j > 5")
        if not jseq or not j + 2 < jseq[0]:
            return _not_met(report, "needs j + 2 < j_1")
        if not u.certificate.ok:
            return _not_met(report, "u is not a certified scc")
        vec = u.vector
    else:
        vec = u if isinstance(u, FinVector) else FinVector(u)
        if not vec.is_zero():
            raise DomainError("u must be a scaled scc (or zero)")
    return _verdict(report, _evaluate_both(f, vec), bound)


# ---------------------------------------------------------------------------
# Traces


@dataclass
class ConstructionTrace:
    kind: str
    j: int
    spec: SpaceSpec
    intervals: list[tuple[int, int]] = field(default_factory=list)
    blocks: list[list[tuple[int, ...]]] = field(default_factory=list)
    sigma: list[dict] = field(default_factory=list)
    levels: dict[str, list] = field(default_factory=dict)
    vectors: dict[str, FinVector] = field(default_factory=dict)
    functionals: dict[str, TreeFunctional] = field(default_factory=dict)
    certificates: dict[str, dict] = field(default_factory=dict)
    checks: Report = field(default_factory=lambda: Report("construction"))
    flags: dict[str, object] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    table_hash: str | None = None
    status: str = "complete"
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "complete" and self.checks.ok

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "j": self.j,
            "spec": self.spec.to_json(),
            "status": self.status,
            "failure": self.failure,
            "intervals": [list(e) for e in self.intervals],
            "blocks": [[list(a) for a in row] for row in self.blocks],
            "sigma": self.sigma,
            "levels": self.levels,
            "vectors": {k: v.to_json() for k, v in sorted(self.vectors.items())},
            "functionals": {k: f.to_json() for k, f in sorted(self.functionals.items())},
            "certificates": self.certificates,
            "checks": self.checks.finish().to_json(),
            "flags": self.flags,
            "notes": self.notes,
            "table_hash": self.table_hash,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ConstructionTrace":
        trace = cls(data["kind"], int(data["j"]), SpaceSpec.from_json(data["spec"]))
        trace.status = data.get("status", "complete")
        trace.failure = data.get("failure")
        trace.intervals = [tuple(e) for e in data.get("intervals", [])]
        trace.blocks = [[tuple(a) for a in row] for row in data.get("blocks", [])]
        trace.sigma = list(data.get("sigma", []))
        trace.levels = dict(data.get("levels", {}))
        trace.vectors = {k: FinVector.from_json(v) for k, v in data.get("vectors", {}).items()}
        trace.functionals = {k: TreeFunctional.from_json(v) for k, v in data.get("functionals", {}).items()}
        trace.certificates = dict(data.get("certificates", {}))
        if "checks" in data:
            trace.checks = Report.from_json(data["checks"])
        trace.flags = dict(data.get("flags", {}))
        trace.notes = list(data.get("notes", []))
        trace.table_hash = data.get("table_hash")
        return trace

    def revalidate(self, cf: CodingFunction) -> Report:
        """Re-run every certificate from the stored vectors and functionals."""
        report = Report(f"revalidate-{self.kind}")
        for name, f in sorted(self.functionals.items()):
            if f.op != "dependent":
                continue
            cert = validate_dependent(f.children, (f.j - 1) // 2, f.intervals, f.blocks, cf, self.spec)
            report.add(f"{name}: dependent", cert.ok, failed=cert.report.failed())
            report.add(f"{name}: tree", validate_W(f, self.spec, cf).ok)
        for name, level in sorted(self.levels.items()):
            for pos, entry in enumerate(level):
                scc = Scc.from_json(entry)
                again = check_basic_scc(scc.shadow, scc.certificate.n, scc.certificate.eps)
                report.add(f"{name}[{pos}]: scc", again.to_json() == scc.certificate.to_json())
        if self.kind == "tight-witness":
            value = evaluate(self.functionals["x*"], self.vectors["x"])
            report.add("x*(x) = 1", value == 1, value=value)
        return report.finish()


# ---------------------------------------------------------------------------
# Builders


def _grow(make_next: Callable[[], object], minsupp: Callable[[object], int], degree: int, count: int | None) -> list:
    """Produce items until their minima form a maximal ``S_degree`` set (or ``count`` items)."""
    items = []
    if count is not None:
        for _ in range(count):
            items.append(make_next())
        return items
    tracker = FamilyTracker(FamilySpec("S", degree))
    state = tracker.start()
    while True:
        item = make_next()
        items.append(item)
        state = tracker.push(state, minsupp(item))
        if not any(state):
            return items


def _normalised(v: FinVector, spec: SpaceSpec, budget) -> tuple[FinVector, TreeFunctional]:
    res = _fragment_norm(v, spec, budget)
    if not res.exact and not spec.has_undecidable_rules():
        raise LimitExceeded("budget exhausted while normalising an inner vector")
    return v * (1 / res.value), res.witness


def _first_index(spec: SpaceSpec, j: int) -> int:
    params = spec.params
    j1 = 1
    while not (params.in_L1(j1) and params.m(2 * j1) > params.n(2 * j + 1)):
        j1 += 1
    return 2 * j1


def _hull(vs: Sequence[FinVector]) -> tuple[int, int]:
    return min(v.minsupp for v in vs), max(v.maxsupp for v in vs)


def _member_functional(children: Sequence[TreeFunctional], t: int, spec: SpaceSpec) -> TreeFunctional:
    return TreeFunctional.node(spec.theta(t), children, op="allowable", j=t)


class _Stream:
    def __init__(self, items: Sequence, what: str):
        self.items = list(items)
        self.pos = 0
        self.what = what

    def take(self, k: int) -> list:
        if self.pos + k > len(self.items):
            raise CarrierExhausted(f"ran out of {self.what} after {len(self.items)} items")
        out = self.items[self.pos : self.pos + k]
        self.pos += k
        return out

    def peek_mins(self):
        for item in self.items[self.pos :]:
            yield item.minsupp


def _carrier_length(stream: _Stream, degree: int) -> int:
    tracker = FamilyTracker(FamilySpec("S", degree))
    state = tracker.start()
    for count, a in enumerate(stream.peek_mins(), start=1):
        state = tracker.push(state, a)
        if not any(state):
            return count
    raise CarrierExhausted(f"ran out of {stream.what} for a degree-{degree} carrier")


def build_dependent_pair(
    blocksY: Sequence[FinVector],
    blocksZ: Sequence[FinVector],
    j: int,
    spec: SpaceSpec,
    cf: CodingFunction,
    budget=None,
    degrees: tuple[int, int, int] = (0, 1, 1),
    eps: tuple = (1, 1, 1),
    outer_members: int | None = None,
) -> ConstructionTrace:
    """One level of the paired construction on two aligned block sequences.

    ``degrees`` and ``eps`` give the scc orders and smallness bounds for the
    inner, middle and outer levels.  Block ``r`` of ``Y`` is paired with
    block ``r`` of ``Z``; the interval attached to an inner pair is the hull
    of both ranges.  ``z`` reuses every coefficient chosen for ``y``.
    """
    blocksY, blocksZ = list(blocksY), list(blocksZ)
    if len(blocksY) < 2:
        raise DomainError("need at least two Y blocks")
    if len(blocksZ) != len(blocksY):
        raise DomainError("Y and Z need the same number of blocks")
    if not is_block_sequence(blocksY) or not is_block_sequence(blocksZ):
        raise DomainError("Y and Z must be block sequences")
    hulls = [_hull([y, z]) for y, z in zip(blocksY, blocksZ)]
    if any(a[1] >= b[0] for a, b in zip(hulls, hulls[1:])):
        raise DomainError("block ranges of Y and Z cannot be aligned into successive intervals")
    d_in, d_mid, d_out = degrees
    eps = tuple(Fraction(e) for e in eps)
    params = spec.params
    trace = ConstructionTrace("dependent-pair", j, spec)
    streamY, streamZ = _Stream(blocksY, "Y blocks"), _Stream(blocksZ, "Z blocks")
    intervals: list[tuple[int, int]] = []
    layout: list[list[tuple[int, ...]]] = []
    members: list[dict] = []
    t = _first_index(spec, j)

    def next_inner():
        k = _carrier_length(streamY, d_in)
        ys, zs = streamY.take(k), streamZ.take(k)
        sy = make_scc(ys, d_in, eps[0])
        sz = make_scc(zs, d_in, eps[0], coeffs=sy.coeffs)
        y, ystar = _normalised(sy.vector, spec, budget)
        z, zstar = _normalised(sz.vector, spec, budget)
        intervals.append(_hull([y, z]))
        return {"y": y, "z": z, "y*": ystar, "z*": zstar, "scc": (sy, sz)}

    def next_member():
        nonlocal t
        if members:
            history = intervals[:]
            t = cf.sigma(history)
            trace.sigma.append({"history": [list(e) for e in history], "value": t})
        start = len(intervals)
        inners = _grow(next_inner, lambda it: it["y"].minsupp, d_mid, None)
        layout.append([(r,) for r in range(start + 1, len(intervals) + 1)])
        sy = make_scc([it["y"] for it in inners], d_mid, eps[1])
        sz = make_scc([it["z"] for it in inners], d_mid, eps[1], coeffs=sy.coeffs)
        scale = params.m(t)
        member = {
            "t": t,
            "inner": inners,
            "y": sy.scaled(scale),
            "z": sz.scaled(scale),
            "y*": _member_functional([it["y*"] for it in inners], t, spec),
            "z*": _member_functional([it["z*"] for it in inners], t, spec),
        }
        members.append(member)
        return member

    try:
        _grow(next_member, lambda m: m["y"].vector.minsupp, d_out, outer_members)
    except (CarrierExhausted, LimitExceeded) as exc:
        trace.status, trace.failure = "partial", str(exc)
        trace.intervals, trace.blocks = intervals, layout
        return trace

    if outer_members is None:
        outer_y = make_scc([m["y"].vector for m in members], d_out, eps[2])
    else:
        share = Fraction(1, len(members))
        outer_y = make_scc([m["y"].vector for m in members], d_out, eps[2], coeffs=[share] * len(members))
    outer_z = make_scc([m["z"].vector for m in members], d_out, eps[2], coeffs=outer_y.coeffs)
    scale = params.m(2 * j + 1)
    trace.intervals, trace.blocks = intervals, layout
    trace.vectors.update({"u": outer_y.scaled(scale).vector, "v": outer_z.scaled(scale).vector})
    for name in ("y", "z"):
        fstar = special_functional([m[f"{name}*"] for m in members], j, intervals, layout, spec)
        trace.functionals[f"{name}*"] = fstar
        cert = validate_dependent(fstar.children, j, intervals, layout, cf, spec)
        trace.certificates[f"{name}* dependent"] = cert.report.to_json()
        trace.checks.add(f"{name}* members dependent", cert.ok, failed=cert.report.failed())
        trace.checks.add(f"{name}* in W", validate_W(fstar, spec, cf).ok)
    trace.levels["inner"] = [s.to_json() for m in members for it in m["inner"] for s in it["scc"]]
    trace.levels["middle"] = [m[k].to_json() for m in members for k in ("y", "z")]
    trace.levels["outer"] = [outer_y.scaled(scale).to_json(), outer_z.scaled(scale).to_json()]
    trace.checks.add("scc certificates", all(
        Scc.from_json(e).certificate.ok for lvl in trace.levels.values() for e in lvl
    ))

    # each inner range sits inside its interval
    flat = [it for m in members for it in m["inner"]]
    inside = all(
        lo <= it[v].minsupp and it[v].maxsupp <= hi
        for it, (lo, hi) in zip(flat, intervals)
        for v in ("y", "z")
    )
    trace.checks.add("ranges inside intervals", inside)

    # strict growth of the coded weights over the members
    failures = []
    for i in range(len(members) - 1):
        top = members[i]["y"].vector.maxsupp
        need = params.rho(top) + top
        if not params.n(members[i + 1]["t"]) > need:
            failures.append({"member": i + 1, "n": params.n(members[i + 1]["t"]), "need": need})
    trace.checks.add("coding growth", not failures, failures=failures)
    trace.checks.finish()

    trace.flags = {
        "degrees": list(degrees),
        "eps": [fmt(e) for e in eps],
        "paper_outer_degree": params.n(2 * j + 1),
        "outer_degree_met": d_out >= params.n(2 * j + 1),
        "paper_middle_degrees": [params.n(m["t"]) for m in members],
        "middle_degrees_met": all(d_mid >= params.n(m["t"]) for m in members),
        "declared_ris_constants": {"inner": 2, "middle": 28},
        "weights": [m["t"] for m in members],
    }
    trace.notes.append(
        f"partial sum of 1/m_(2j) over this finite level: {fmt(Fraction(1, params.m(2 * j)))}"
    )
    trace.table_hash = cf.digest()
    return trace


def build_tight_witness(
    blocks: Sequence[FinVector],
    j: int,
    spec: SpaceSpec,
    cf: CodingFunction,
    budget=None,
    degrees: tuple[int, int, int] = (0, 1, 1),
    eps: tuple = (1, 1, 1),
    outer_members: int | None = None,
    inner_degree_override: Mapping[tuple[int, int], int] | None = None,
) -> ConstructionTrace:
    """A vector ``x`` and special functional ``x*`` with ``x*(x) = 1``.

    The first inner vector of each member gets the single interval
    ``ran x_{i,1}``; every later inner vector gets one interval per block it
    uses, namely that block's range.  ``inner_degree_override`` maps 1-based
    ``(i, k)`` to an scc order used instead of ``degrees[0]``.
    """
    blocks = list(blocks)
    if not blocks:
        raise DomainError("need at least one block")
    if not is_block_sequence(blocks):
        raise DomainError("blocks must be a block sequence")
    d_in, d_mid, d_out = degrees
    eps = tuple(Fraction(e) for e in eps)
    override = dict(inner_degree_override or {})
    params = spec.params
    trace = ConstructionTrace("tight-witness", j, spec)
    stream = _Stream(blocks, "blocks")
    intervals: list[tuple[int, int]] = []
    layout: list[list[tuple[int, ...]]] = []
    members: list[dict] = []
    admissibility: list[dict] = []
    t = _first_index(spec, j)

    def build_member():
        nonlocal t
        if members:
            history = intervals[:]
            t = cf.sigma(history)
            trace.sigma.append({"history": [list(e) for e in history], "value": t})
        i = len(members) + 1
        inners: list[dict] = []
        rows: list[tuple[int, ...]] = []

        def next_inner():
            k = len(inners) + 1
            degree = override.get((i, k), d_in)
            count = _carrier_length(stream, degree)
            used = stream.take(count)
            scc = make_scc(used, degree, eps[0])
            x, xstar = _normalised(scc.vector, spec, budget)
            start = len(intervals)
            if k == 1:
                intervals.append((x.minsupp, x.maxsupp))
            else:
                intervals.extend((b.minsupp, b.maxsupp) for b in used)
                prev = inners[-1]["x"].maxsupp
                level = params.rho(prev)
                mins = [b.minsupp for b in used]
                admissibility.append({
                    "member": i, "k": k, "level": level, "mins": mins,
                    "ok": family_member(mins, FamilySpec("S", level)),
                })
            rows.append(tuple(range(start + 1, len(intervals) + 1)))
            item = {"x": x, "x*": xstar, "scc": scc}
            inners.append(item)
            return item

        _grow(next_inner, lambda it: it["x"].minsupp, d_mid, None)
        layout.append(rows)
        scc = make_scc([it["x"] for it in inners], d_mid, eps[1])
        member = {
            "t": t,
            "inner": inners,
            "x": scc.scaled(params.m(t)),
            "x*": _member_functional([it["x*"] for it in inners], t, spec),
        }
        members.append(member)
        return member

    try:
        _grow(build_member, lambda m: m["x"].vector.minsupp, d_out, outer_members)
    except (CarrierExhausted, LimitExceeded) as exc:
        trace.status, trace.failure = "partial", str(exc)
        trace.intervals, trace.blocks = intervals, layout
        return trace

    coeffs = None if outer_members is None else [Fraction(1, len(members))] * len(members)
    outer = make_scc([m["x"].vector for m in members], d_out, eps[2], coeffs=coeffs)
    scale = params.m(2 * j + 1)
    x = outer.scaled(scale).vector
    xstar = special_functional([m["x*"] for m in members], j, intervals, layout, spec)
    trace.intervals, trace.blocks = intervals, layout
    trace.vectors["x"] = x
    trace.functionals["x*"] = xstar
    trace.levels["inner"] = [it["scc"].to_json() for m in members for it in m["inner"]]
    trace.levels["middle"] = [m["x"].to_json() for m in members]
    trace.levels["outer"] = [outer.scaled(scale).to_json()]

    cert = validate_dependent(xstar.children, j, intervals, layout, cf, spec)
    trace.certificates["x* dependent"] = cert.report.to_json()
    trace.checks.add("x* members dependent", cert.ok, failed=cert.report.failed())
    trace.checks.add("x* in W", validate_W(xstar, spec, cf).ok)
    trace.checks.add("interval admissibility", all(a["ok"] for a in admissibility), rows=admissibility)
    value = evaluate(xstar, x)
    trace.checks.add("x*(x) = 1", value == 1, value=value)
    trace.checks.add("scc certificates", all(
        Scc.from_json(e).certificate.ok for lvl in trace.levels.values() for e in lvl
    ))
    trace.checks.finish()
    trace.flags = {
        "degrees": list(degrees),
        "eps": [fmt(e) for e in eps],
        "paper_outer_degree": params.n(2 * j + 1),
        "outer_degree_met": d_out >= params.n(2 * j + 1),
        "weights": [m["t"] for m in members],
    }
    trace.table_hash = cf.digest()
    return trace
