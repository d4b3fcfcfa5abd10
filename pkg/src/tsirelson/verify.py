"""Fixed-seed property suites shared by the command line and the test suite.

Each suite returns a JSON-ready summary with an ``ok`` flag and the first
few counterexamples it found.
"""
from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction
from typing import Callable

from .coding import CodingFunction, canonical_sequences
from .constructions import build_dependent_pair, build_tight_witness
from .errors import DomainError, NotSchreierError
from .families import (
    FamilySpec,
    family_member,
    max_weight_subfamily,
    max_weight_subfamily_exhaustive,
    modified_member,
    subsets,
)
from .functionals import admi_check, g_operation, validate_dependent, validate_W4, w4_fragment
from .norm import brute_force_norm_oracle, check_standard_inequality, norm
from .parameters import (
    SpaceSpec,
    a_toy,
    a_toy_two_levels,
    admi_space,
    modified_tsirelson_toy,
    toy_space,
    toy_w4,
    tsirelson_toy,
)
from .rational import fmt
from .trees import TreeFunctional, evaluate, g_intervals
from .vectors import FinVector, check_basic_scc, greedy_carrier, repeated_average

MAX_REPORTED = 5
DEFAULT_SEED = 20240601


def _summary(name: str, checked: int, failures: list, **extra) -> dict:
    return {
        "suite": name,
        "checked": checked,
        "violations": len(failures),
        "failures": failures[:MAX_REPORTED],
        "ok": not failures,
        **extra,
    }


def random_vector(rng: random.Random, max_support: int, top: int = 12, nonneg: bool = False) -> FinVector:
    size = rng.randint(1, max_support)
    idx = rng.sample(range(1, top + 1), size)
    lo = 0 if nonneg else -4
    coords = {}
    for i in idx:
        v = Fraction(rng.randint(lo, 4), rng.randint(1, 3))
        coords[i] = v if v else Fraction(1)
    return FinVector(coords)


# ---------------------------------------------------------------------------


def suite_schreier_eq(seed: int = DEFAULT_SEED, ground: int = 12) -> dict:
    start = time.perf_counter()
    failures = []
    checked = 0
    for n in (1, 2):
        for F in subsets(range(1, ground + 1)):
            checked += 1
            if family_member(F, FamilySpec("S", n)) != modified_member(F, n):
                failures.append({"F": list(F), "n": n})
    return _summary("schreier-eq", checked, failures, mismatches=len(failures),
                    seconds=round(time.perf_counter() - start, 2))


AXIOM_SPACES: tuple[Callable[[], SpaceSpec], ...] = (tsirelson_toy, a_toy, a_toy_two_levels, modified_tsirelson_toy)


def suite_norm_axioms(seed: int = DEFAULT_SEED, samples: int = 1000) -> dict:
    rng = random.Random(seed)
    spaces = [make() for make in AXIOM_SPACES]
    failures = []
    for s in range(samples):
        spec = spaces[s % len(spaces)]
        x = random_vector(rng, 5, top=10)
        y = random_vector(rng, 4, top=10)
        lam = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        nx, ny = norm(x, spec).value, norm(y, spec).value
        problems = []
        if norm(x + y, spec).value > nx + ny:
            problems.append("triangle")
        if norm(x * lam, spec).value != abs(lam) * nx:
            problems.append("homogeneity")
        flips = FinVector({i: (-v if rng.random() < 0.5 else v) for i, v in x.items()})
        if norm(flips, spec).value != nx:
            problems.append("sign change")
        keep = [i for i in x.support if rng.random() < 0.6]
        if norm(x.project(keep), spec).value > nx:
            problems.append("projection")
        if not x.linf() <= nx <= x.l1():
            problems.append("linf <= norm <= l1")
        if problems:
            failures.append({"space": spec.name, "x": x.to_json(), "y": y.to_json(), "lambda": fmt(lam), "failed": problems})
    return _summary("norm-axioms", samples, failures, samples=samples)


def suite_oracle_eq(seed: int = DEFAULT_SEED, samples: int = 500) -> dict:
    """Dynamic program against the exhaustive oracle at full depth.

    Every child of an operation node has a strictly smaller support, so trees
    over ``s`` coordinates have at most ``s`` levels and depth ``s`` is exact.
    """
    rng = random.Random(seed)
    failures = []
    checked = 0
    for make in (tsirelson_toy, a_toy):
        spec = make()
        for _ in range(samples):
            x = random_vector(rng, 5, top=12)
            checked += 1
            dp = norm(x, spec).value
            oracle = brute_force_norm_oracle(x, spec, max_depth=len(x))
            if dp != oracle:
                failures.append({"space": spec.name, "x": x.to_json(), "dp": fmt(dp), "oracle": fmt(oracle)})
    return _summary("oracle-eq", checked, failures, per_space=samples)


def suite_standard_inequality(seed: int = DEFAULT_SEED, samples: int = 200) -> dict:
    rng = random.Random(seed)
    spaces = [tsirelson_toy(), a_toy(), a_toy_two_levels()]
    failures = []
    for s in range(samples):
        spec = spaces[s % len(spaces)]
        x = random_vector(rng, 6, top=12)
        j = 1 if spec.name != "a3-a9" or rng.random() < 0.5 else 2
        op = spec.rule_for(2 * j)
        segments = _random_segments(rng, op.family, top=12)
        report = check_standard_inequality(x, spec, j, segments)
        if not report.ok:
            failures.append({"space": spec.name, "x": x.to_json(), "j": j, "segments": segments})
    return _summary("standard-inequality", samples, failures, samples=samples)


def _random_segments(rng: random.Random, family: FamilySpec, top: int) -> list[list[int]]:
    """Random successive intervals of ``1..top`` whose minima lie in ``family``."""
    while True:
        cuts = sorted(rng.sample(range(1, top + 1), rng.randint(1, 4)))
        segments = []
        for pos, lo in enumerate(cuts):
            hi = cuts[pos + 1] - 1 if pos + 1 < len(cuts) else top
            hi = rng.randint(lo, hi)
            segments.append(list(range(lo, hi + 1)))
        if family_member([s[0] for s in segments], family):
            return segments


def suite_scc(seed: int = DEFAULT_SEED) -> dict:
    failures = []
    checked = 0
    compared = 0
    for n in (0, 1, 2):
        for start in range(2, 9):
            stream = itertools.count(start)
            carrier = greedy_carrier(stream, n)
            x = repeated_average(itertools.count(start), n)
            eps = Fraction(3, start)
            cert = check_basic_scc(x, n, eps)
            checked += 1
            if not cert.ok or cert.carrier != carrier:
                failures.append({"n": n, "start": start, "violations": cert.violations})
            if n and len(carrier) <= 10:
                compared += 1
                family = FamilySpec("S", n - 1)
                exhaustive = max_weight_subfamily_exhaustive(carrier, dict(x), family)
                if exhaustive != cert.smallness or exhaustive != max_weight_subfamily(carrier, dict(x), family):
                    failures.append({"n": n, "start": start, "smallness": fmt(cert.smallness), "exhaustive": fmt(exhaustive)})
    example = check_basic_scc(repeated_average(itertools.count(4), 2), 2, Fraction(1, 2))
    if example.smallness != Fraction(1, 4):
        failures.append({"example": "n=2 from 4", "smallness": fmt(example.smallness)})
    return _summary("scc", checked, failures, compared_exhaustively=compared,
                    example_smallness=fmt(example.smallness))


def suite_sigma(seed: int = DEFAULT_SEED, count: int = 10_000) -> dict:
    spec = toy_space()
    cf = CodingFunction(spec.params)
    failures = []
    values = set()
    for seq in itertools.islice(canonical_sequences(), count):
        t = cf.sigma(seq)
        if t in values:
            failures.append({"seq": [list(e) for e in seq], "value": t, "reason": "repeated value"})
        values.add(t)
        if not cf.growth_ok(seq, t) or t % 2 or not spec.params.in_L2(t // 2):
            failures.append({"seq": [list(e) for e in seq], "value": t, "reason": "growth or parity"})
    again = CodingFunction.load(cf.export())
    if again.items() != cf.items() or again.digest() != cf.digest():
        failures.append({"reason": "export/import changed the table"})
    return _summary("sigma", count, failures, largest=max(values), digest=cf.digest())


# ---------------------------------------------------------------------------
# Dependent sequences: golden instance and single-clause mutations


def golden_pair(cf: CodingFunction | None = None):
    """Builder output used as the reference dependent sequence.

    Blocks ``e_{2r} + e_{2r+1}`` and ``e_{2r} - e_{2r+1}`` share their ranges,
    so both sides get the same carriers.  Three members with minima 2, 6, 18
    give an ``S_2`` outer carrier that is not ``S_1``: dropping to ``j = 0``
    then breaks only the admissibility of the members.
    """
    spec = toy_space()
    cf = cf or CodingFunction(spec.params)
    Y = [FinVector({2 * r: 1, 2 * r + 1: 1}) for r in range(1, 30)]
    Z = [FinVector({2 * r: 1, 2 * r + 1: -1}) for r in range(1, 30)]
    trace = build_dependent_pair(Y, Z, 1, spec, cf, degrees=(0, 1, 2), eps=(1, 1, Fraction(3, 4)), outer_members=3)
    return trace, spec, cf


def mutations(f: TreeFunctional, spec: SpaceSpec) -> dict[str, tuple]:
    """Each entry changes one clause: ``(members, j, intervals, blocks)``."""
    members = list(f.children)
    j = (f.j - 1) // 2
    intervals = list(f.intervals)
    blocks = [[tuple(a) for a in row] for row in f.blocks]
    out = {"admissible": (members, j - 1, intervals, blocks)}

    first = members[0]
    t = first.j + 2
    while spec.params.in_L1(t // 2):
        t += 2
    out["first weight"] = ([TreeFunctional.node(spec.theta(t), first.children, op=first.op, j=t)] + members[1:], j, intervals, blocks)

    second = members[1]
    t = second.j + 2
    while not spec.params.in_L2(t // 2):
        t += 2
    changed = members[:1] + [TreeFunctional.node(spec.theta(t), second.children, op=second.op, j=t)] + members[2:]
    out["coded weights"] = (changed, j, intervals, blocks)

    lo, hi = intervals[-1]
    out["supports inside intervals"] = (members, j, intervals[:-1] + [(hi + 1, hi + 1)], blocks)

    r = blocks[-1][0][0] - 1
    lo, hi = intervals[r]
    if lo == hi:
        raise DomainError("cannot split a one-point interval")
    split = intervals[:r] + [(lo, lo), (lo + 1, hi)] + intervals[r + 1 :]
    last = [(r + 1, r + 2)] + [tuple(a + 1 for a in A) for A in blocks[-1][1:]]
    out["interval blocks"] = (members, j, split, blocks[:-1] + [last])
    return out


def suite_dependent(seed: int = DEFAULT_SEED) -> dict:
    trace, spec, cf = golden_pair()
    failures = []
    results = {}
    for name in ("y*", "z*"):
        f = trace.functionals[name]
        cert = validate_dependent(f.children, (f.j - 1) // 2, f.intervals, f.blocks, cf, spec)
        results[name] = cert.report.verdict
        if not cert.ok:
            failures.append({"golden": name, "failed": cert.report.failed()})
    for clause, (members, j, intervals, blocks) in mutations(trace.functionals["y*"], spec).items():
        cert = validate_dependent(members, j, intervals, blocks, cf, spec)
        results[clause] = cert.report.failed()
        if cert.report.failed() != [clause]:
            failures.append({"mutation": clause, "failed": cert.report.failed()})
    return _summary("dependent", 2 + 5, failures, results=results, table_hash=cf.digest())


# ---------------------------------------------------------------------------
# Tree analyses


def random_allowable_tree(rng: random.Random, indices: list[int], spec: SpaceSpec, leaf_bias: float = 0.3) -> TreeFunctional:
    """A random valid tree of allowable operations over a subset of ``indices``."""
    if len(indices) == 1 or rng.random() < leaf_bias:
        return TreeFunctional.leaf(rng.choice(indices), rng.choice((1, -1)))
    ops = spec.operations(kinds=("allowable",), support_size=len(indices))
    op = rng.choice(ops)
    for _ in range(10):
        pool = indices[:]
        rng.shuffle(pool)
        parts = rng.randint(2, min(3, len(pool)))
        cuts = sorted(rng.sample(range(1, len(pool)), parts - 1))
        groups = [sorted(pool[a:b]) for a, b in zip([0] + cuts, cuts + [len(pool)])]
        if family_member(sorted(g[0] for g in groups), op.family):
            break
    else:
        return TreeFunctional.leaf(indices[0])
    children = [random_allowable_tree(rng, g, spec, leaf_bias) for g in groups]
    children.sort(key=lambda c: c.support[0])
    return TreeFunctional.node(op.theta, children, op="allowable", j=op.j)


def suite_admi(seed: int = DEFAULT_SEED, trees: int = 300) -> dict:
    rng = random.Random(seed)
    spec = admi_space()
    failures = []
    checked = 0
    largest = 0
    for _ in range(trees):
        size = rng.randint(1, 8)
        indices = sorted(rng.sample(range(1, 16), size))
        f = random_allowable_tree(rng, indices, spec)
        largest = max(largest, f.size())
        for j in range(2, 7):
            checked += 1
            report = admi_check(f, j, spec)
            if not report.ok:
                failures.append({"j": j, "tree": f.to_json(), "failed": report.failed()})
    return _summary("admi", checked, failures, trees=trees, largest_tree=largest)


def random_schreier_pair(rng: random.Random, top: int = 16) -> tuple[int, ...]:
    lo = rng.randint(2, 6)
    q = rng.randint(1, min(lo, top - lo + 1) // 2)
    rest = sorted(rng.sample(range(lo + 1, top + 1), 2 * q - 1))
    return (lo, *rest)


def suite_w4(seed: int = DEFAULT_SEED, samples: int = 100) -> dict:
    rng = random.Random(seed)
    spec = toy_w4()
    failures = []
    for _ in range(samples):
        f = random_vector(rng, 8, top=16)
        F = random_schreier_pair(rng)
        kept = {i for a, b in zip(F[::2], F[1::2]) for i in range(a, b)}
        expected = FinVector({i: v / 2 for i, v in f.items() if i in kept})
        if g_operation(f, F) != expected:
            failures.append({"f": f.to_json(), "F": list(F)})
    rejected = 0
    for bad in [(3,), (2, 3, 5, 6), (5, 4), (1, 2), (2, 4, 6)]:
        try:
            g_intervals(bad)
        except NotSchreierError:
            rejected += 1
        else:
            failures.append({"F": list(bad), "reason": "accepted an invalid set"})
    revalidated = 0
    for f in w4_fragment(spec, [2, 3, 4, 5, 6, 7]):
        if not validate_W4(f, spec).ok:
            failures.append({"f": f.to_json(), "reason": "fragment member does not validate"})
            continue
        F = random_schreier_pair(rng, top=9)
        g = g_operation(f, F)
        revalidated += 1
        if not validate_W4(g, spec).ok or g.coefficients() != g_operation(f.coefficients(), F):
            failures.append({"f": f.to_json(), "F": list(F), "reason": "G-operation output"})
    return _summary("w4", samples, failures, rejected=rejected, revalidated=revalidated)


def random_blocks(rng: random.Random, count: int = 600) -> list[FinVector]:
    """Successive blocks of width 1 or 2 with small signed rational entries."""
    pos = rng.randint(2, 4)
    blocks = []
    for _ in range(count):
        width = rng.randint(1, 2)
        blocks.append(FinVector({pos + k: Fraction(rng.choice((-3, -2, -1, 1, 2, 3)), rng.randint(1, 3)) for k in range(width)}))
        pos += width + rng.randint(0, 1)
    return blocks


def suite_tight_witness(seed: int = DEFAULT_SEED, instances: int = 20) -> dict:
    rng = random.Random(seed)
    spec = toy_space()
    failures = []
    values = []
    for n in range(instances):
        blocks = random_blocks(rng)
        j = rng.choice((1, 1, 2))
        cf = CodingFunction(spec.params)
        trace = build_tight_witness(blocks, j, spec, cf)
        value = evaluate(trace.functionals["x*"], trace.vectors["x"]) if trace.status == "complete" else None
        values.append(fmt(value) if value is not None else None)
        if value != 1 or not trace.ok or not trace.revalidate(cf).ok:
            failures.append({"instance": n, "j": j, "status": trace.status, "failed": trace.checks.failed(),
                             "value": values[-1]})
    return _summary("tight-witness", instances, failures, values=values)


SUITES: dict[str, Callable[..., dict]] = {
    "schreier-eq": suite_schreier_eq,
    "norm-axioms": suite_norm_axioms,
    "oracle-eq": suite_oracle_eq,
    "standard-inequality": suite_standard_inequality,
    "scc": suite_scc,
    "sigma": suite_sigma,
    "dependent": suite_dependent,
    "admi": suite_admi,
    "w4": suite_w4,
    "tight-witness": suite_tight_witness,
}


def run_suite(name: str, seed: int = DEFAULT_SEED) -> dict:
    try:
        suite = SUITES[name]
    except KeyError:
        raise DomainError(f"unknown suite {name!r}; known: {sorted(SUITES)}") from None
    return suite(seed=seed)
