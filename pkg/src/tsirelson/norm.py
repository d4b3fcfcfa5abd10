"""Exact norms of finitely supported vectors.

The norm is the least fixed point of

    N(x) = max( ||x||_inf,  max_op theta_op * max sum_i N(E_i x) )

over the operations of a space.  For a support set ``A`` (a bitmask over the
positions of ``supp x``) the recursion used here is

    N(A) = max( max_{i in A} |x_i|,  N(A minus min A),  max_op theta_op * P_op(A) )

where ``P_op(A)`` maximises ``sum N(piece)`` over partitions of ``A`` into at
least two pieces whose minima are accepted by the operation's family (pieces
are runs of consecutive elements for block operations and arbitrary sets for
allowable ones).  This is exact: given any functional acting on ``A``, the
elements of ``A`` not covered by its children and larger than the smallest
child minimum can be appended to the child with the largest minimum below
them (which keeps block children successive and does not decrease ``N`` of a
child); the uncovered elements below every child are removed by the
``N(A minus min A)`` branch.  The partition search keeps the greedy family
state of the minima chosen so far, so it is a dynamic program over
``(remaining set, family state)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError, LimitExceeded, UnsupportedRule
from .families import (
    REJECT,
    FamilySpec,
    FamilyTracker,
    family_member,
    is_admissible,
    modified_member,
    schreier_member_bruteforce,
)
from .parameters import Operation, SpaceSpec
from .rational import fmt
from .report import Report
from .trees import TreeFunctional, evaluate
from .vectors import FinVector

ALLOWABLE_SUPPORT_LIMIT = 10
ORACLE_SUPPORT_LIMIT = 9
ORACLE_DEPTH_LIMIT = 6


@dataclass
class Budget:
    """Cap on dynamic-programming states; ``None`` means unlimited."""

    max_states: int | None = None

    @classmethod
    def of(cls, value) -> "Budget":
        if isinstance(value, Budget):
            return value
        return cls(None if value is None else int(value))


@dataclass
class NormResult:
    value: Fraction
    witness: TreeFunctional | None
    method: str
    exact: bool = True
    fragment_value: Fraction | None = None
    linf: Fraction = Fraction(0)
    notes: list[str] = field(default_factory=list)

    @property
    def lower_bound_only(self) -> bool:
        return not self.exact

    def to_json(self) -> dict:
        out = {
            "value": fmt(self.value),
            "method": self.method,
            "exact": self.exact,
            "linf": fmt(self.linf),
            "fragment_value": fmt(self.fragment_value if self.fragment_value is not None else self.value),
            "notes": list(self.notes),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Engine:
    def __init__(self, x: FinVector, ops: Sequence[Operation], budget: Budget):
        self.index = x.support
        self.abs = [abs(x[i]) for i in self.index]
        self.sign = [1 if x[i] > 0 else -1 for i in self.index]
        self.ops = list(ops)
        self.subsets = any(op.mode == "allowable" for op in self.ops)
        if self.subsets and len(self.index) > ALLOWABLE_SUPPORT_LIMIT:
            raise LimitExceeded(
                f"allowable operations need |supp x| <= {ALLOWABLE_SUPPORT_LIMIT}, got {len(self.index)}"
            )
        size = len(self.index)
        self.trackers = [FamilyTracker(op.family, max_elements=size) for op in self.ops]
        self.budget = budget
        self.steps = 0
        self.truncated = False
        self._N: dict[int, tuple] = {}
        self._G: dict[tuple, tuple] = {}

    def _tick(self) -> bool:
        self.steps += 1
        limit = self.budget.max_states
        if limit is not None and self.steps > limit:
            self.truncated = True
            return False
        return True

    def pieces(self, op_i: int, rem: int) -> Iterable[int]:
        """Candidate first pieces of ``rem``: all contain its minimum."""
        low = rem & -rem
        rest = rem ^ low
        if self.ops[op_i].mode == "allowable":
            sub = rest
            while True:
                yield low | sub
                if sub == 0:
                    return
                sub = (sub - 1) & rest
        else:
            piece = low
            yield piece
            for b in _bits(rest):
                piece |= 1 << b
                yield piece

    def N(self, mask: int) -> Fraction:
        hit = self._N.get(mask)
        if hit is not None:
            return hit[0]
        best = (Fraction(-1),)
        for b in _bits(mask):
            if self.abs[b] > best[0]:
                best = (self.abs[b], "leaf", b)
        if mask & (mask - 1):
            rest = mask & (mask - 1)
            v = self.N(rest)
            if v > best[0]:
                best = (v, "drop", rest)
            low = (mask & -mask).bit_length() - 1
            for op_i, op in enumerate(self.ops):
                if not self._tick():
                    break
                start = self.trackers[op_i].push(self.trackers[op_i].start(), self.index[low])
                top = Fraction(-1)
                choice = None
                for piece in self.pieces(op_i, mask):
                    if piece == mask:
                        continue
                    tail = self.G(op_i, mask ^ piece, start)
                    if tail is None:
                        continue
                    total = self.N(piece) + tail
                    if total > top:
                        top, choice = total, piece
                if choice is not None and op.theta * top > best[0]:
                    best = (op.theta * top, "op", op_i, choice, start)
        self._N[mask] = best
        return best[0]

    def G(self, op_i: int, rem: int, state) -> Fraction | None:
        """Best ``sum N(piece)`` over partitions of ``rem`` continuing from ``state``."""
        if rem == 0:
            return Fraction(0)
        key = (op_i, rem, state)
        if key in self._G:
            return self._G[key][0]
        low = (rem & -rem).bit_length() - 1
        nxt = self.trackers[op_i].push(state, self.index[low])
        best: tuple = (None,)
        if nxt is not REJECT and self._tick():
            for piece in self.pieces(op_i, rem):
                tail = self.G(op_i, rem ^ piece, nxt)
                if tail is None:
                    continue
                total = self.N(piece) + tail
                if best[0] is None or total > best[0]:
                    best = (total, piece, nxt)
        self._G[key] = best
        return best[0]

    # -- witnesses -----------------------------------------------------------

    def partition(self, op_i: int, rem: int, state) -> list[int]:
        out = []
        while rem:
            _, piece, state = self._G[(op_i, rem, state)]
            out.append(piece)
            rem ^= piece
        return out

    def witness(self, mask: int) -> TreeFunctional:
        self.N(mask)
        entry = self._N[mask]
        kind = entry[1]
        if kind == "leaf":
            b = entry[2]
            return TreeFunctional.leaf(self.index[b], self.sign[b])
        if kind == "drop":
            return self.witness(entry[2])
        _, _, op_i, first, start = entry
        pieces = [first] + self.partition(op_i, mask ^ first, start)
        return self.op_node(op_i, pieces)

    def op_node(self, op_i: int, pieces: list[int]) -> TreeFunctional:
        op = self.ops[op_i]
        children = [self.witness(p) for p in pieces]
        children.sort(key=lambda c: c.support[0])
        return TreeFunctional.node(op.theta, children, op=op.kind, j=op.j)

    # -- root-restricted search ---------------------------------------------

    def best_root(self, op_i: int, full: int) -> tuple[Fraction, int, list[int]] | None:
        """Best ``theta * sum N(piece)`` with at least one piece, over suffixes of ``full``."""
        best = None
        mask = full
        tracker = self.trackers[op_i]
        while mask:
            value = self.G(op_i, mask, tracker.start())
            if value is not None and (best is None or value > best[0]):
                best = (value, mask)
            mask ^= mask & -mask
        if best is None:
            return None
        value, mask = best
        pieces = self.partition(op_i, mask, tracker.start())
        return self.ops[op_i].theta * value, mask, pieces


def _method(ops: Sequence[Operation]) -> str:
    if any(op.mode == "allowable" for op in ops):
        return "brute-partition"
    if any(op.family.kind == "S" for op in ops):
        return "dp-schreier"
    return "dp-interval"


def _fragment_ops(x: FinVector, spec: SpaceSpec) -> list[Operation]:
    return spec.operations(kinds=("block", "allowable"), support_size=len(x))


def _fold_candidates(result: NormResult, x: FinVector, spec: SpaceSpec, candidates) -> NormResult:
    undecidable = spec.has_undecidable_rules()
    if undecidable and candidates is None:
        raise UnsupportedRule(
            "the space has dependent, special or G-operation rules; pass candidates=[...] "
            "(possibly empty) to get the fragment norm as a lower bound"
        )
    result.fragment_value = result.value
    for f in candidates or ():
        v = abs(evaluate(f, x))
        if v > result.value:
            result.value = v
            result.witness = f if evaluate(f, x) >= 0 else _negate(f)
    if undecidable:
        result.exact = False
        result.notes.append("value is a lower bound: dependent/special rules enter only through candidates")
    return result


def _negate(f: TreeFunctional) -> TreeFunctional:
    if f.is_leaf:
        return TreeFunctional.leaf(f.index, -f.sign)
    return replace(f, children=tuple(_negate(c) for c in f.children), _cache={})


def norm(x: FinVector, spec: SpaceSpec, budget=None, candidates: Sequence[TreeFunctional] | None = None) -> NormResult:
    """Exact norm of ``x`` over the decidable operations of ``spec``.

    ``candidates`` are extra functionals (typically special functionals)
    whose absolute values are folded into the maximum; when the space has
    rules that only enter this way the result is flagged as a lower bound.
    """
    budget = Budget.of(budget)
    ops = _fragment_ops(x, spec)
    if x.is_zero():
        return _fold_candidates(NormResult(Fraction(0), None, _method(ops)), x, spec, candidates)
    engine = _Engine(x, ops, budget)
    full = (1 << len(x)) - 1
    value = engine.N(full)
    result = NormResult(value, engine.witness(full), _method(ops), linf=x.linf())
    if engine.truncated:
        result.exact = False
        result.notes.append(f"budget of {budget.max_states} states exhausted; value is a lower bound")
    return _fold_candidates(result, x, spec, candidates)


def norm_value(x: FinVector, spec: SpaceSpec, **kw) -> Fraction:
    if spec.has_undecidable_rules():
        kw.setdefault("candidates", ())
    return norm(x, spec, **kw).value


def norm_weight_restricted(x: FinVector, spec: SpaceSpec, min_weight, budget=None, candidates=None) -> NormResult:
    """Sup over ``±e_i*`` and functionals whose root weight exceeds ``min_weight``."""
    min_weight = Fraction(min_weight)
    if not 0 < min_weight < 1:
        raise DomainError("min_weight must lie in (0, 1)")
    budget = Budget.of(budget)
    ops = _fragment_ops(x, spec)
    result = NormResult(x.linf(), None, _method(ops), linf=x.linf())
    if x.is_zero():
        return _fold_restricted(result, x, spec, min_weight, candidates)
    engine = _Engine(x, ops, budget)
    full = (1 << len(x)) - 1
    top = max(range(len(x)), key=lambda b: engine.abs[b])
    result.witness = TreeFunctional.leaf(x.support[top], engine.sign[top])
    for op_i, op in enumerate(ops):
        if op.theta <= min_weight:
            continue
        found = engine.best_root(op_i, full)
        if found and found[0] > result.value:
            result.value = found[0]
            result.witness = engine.op_node(op_i, found[2])
    if engine.truncated:
        result.exact = False
        result.notes.append("budget exhausted; value is a lower bound")
    result.notes.append(f"l_inf part {fmt(result.linf)}")
    return _fold_restricted(result, x, spec, min_weight, candidates)


def _fold_restricted(result, x, spec, min_weight, candidates):
    kept = [f for f in candidates or () if f.is_leaf or f.weight > min_weight]
    return _fold_candidates(result, x, spec, kept if candidates is not None else None)


def root_values(x: FinVector, spec: SpaceSpec, budget=None) -> list[tuple[Operation, Fraction, TreeFunctional | None]]:
    """For each decidable operation: the best value of a functional whose root is that operation."""
    ops = _fragment_ops(x, spec)
    if x.is_zero():
        return [(op, Fraction(0), None) for op in ops]
    engine = _Engine(x, ops, Budget.of(budget))
    full = (1 << len(x)) - 1
    out = []
    for op_i, op in enumerate(ops):
        found = engine.best_root(op_i, full)
        if found is None:
            out.append((op, Fraction(0), None))
        else:
            out.append((op, found[0], engine.op_node(op_i, found[2])))
    return out


# ---------------------------------------------------------------------------
# Independent oracle


def _oracle_member(elems: tuple[int, ...], family: FamilySpec) -> bool:
    if family.kind == "A":
        return len(elems) <= family.index
    if family.kind == "SM":
        return modified_member(elems, family.index)
    return schreier_member_bruteforce(elems, family.index)


def brute_force_norm_oracle(
    x: FinVector,
    spec: SpaceSpec,
    max_depth: int = 3,
    max_support: int = ORACLE_SUPPORT_LIMIT,
) -> Fraction:
    """Maximum of ``f(|x|)`` over every tree functional of depth ``<= max_depth``.

    Depth counts levels (a leaf alone has depth 1).  Functionals are grouped
    by their exact support and only the best value per support is kept,
    which is harmless since the rules only look at supports.  Membership is
    decided with the definitional Schreier test, not the greedy tracker.
    """
    if len(x) > max_support or max_depth > ORACLE_DEPTH_LIMIT:
        raise LimitExceeded(
            f"oracle limited to |supp x| <= {max_support} and depth <= {ORACLE_DEPTH_LIMIT}"
        )
    if max_depth < 1:
        raise DomainError("max_depth must be >= 1")
    if spec.has_undecidable_rules():
        raise UnsupportedRule("the oracle enumerates block and allowable operations only")
    if x.is_zero():
        return Fraction(0)
    idx = x.support
    ops = _fragment_ops(x, spec)
    best: dict[frozenset, Fraction] = {frozenset([i]): abs(x[i]) for i in idx}
    for _ in range(max_depth - 1):
        items = sorted(best.items(), key=lambda kv: (min(kv[0]), sorted(kv[0])))
        new = dict(best)
        for op in ops:
            for supports, total in _collections(items, op):
                key = frozenset().union(*supports)
                value = op.theta * total
                if value > new.get(key, Fraction(-1)):
                    new[key] = value
        if new == best:
            break
        best = new
    return max(best.values())


def _collections(items, op: Operation):
    """Sequences of at least two children compatible with ``op``; yields (supports, value sum)."""

    def extend(chosen, used, total, mins):
        if len(chosen) >= 2:
            yield chosen, total
        for supp, value in items:
            lo = min(supp)
            if chosen and lo <= mins[-1]:
                continue
            if op.mode == "allowable":
                if used & supp:
                    continue
            elif chosen and lo <= max(chosen[-1]):
                continue
            if not _oracle_member(tuple(mins) + (lo,), op.family):
                continue
            yield from extend(chosen + [supp], used | supp, total + value, mins + [lo])

    yield from extend([], frozenset(), Fraction(0), [])


# ---------------------------------------------------------------------------
# Inequalities


def _as_set(segment) -> tuple[int, ...]:
    if isinstance(segment, dict) and "lo" in segment:
        return tuple(range(segment["lo"], segment["hi"] + 1))
    return tuple(sorted(int(i) for i in segment))


def check_standard_inequality(x: FinVector, spec: SpaceSpec, j: int, segments: Sequence, budget=None) -> Report:
    """``theta_{2j} * sum_i ||E_i x|| <= ||x||`` for ``S_{n_{2j}}``-admissible ``(E_i)``."""
    op = spec.rule_for(2 * j)
    if op is None:
        family, theta = FamilySpec("S", spec.params.n(2 * j)), spec.theta(2 * j)
    else:
        family, theta = op.family, op.theta
    sets = [_as_set(s) for s in segments]
    if not is_admissible(sets, family, "admissible"):
        raise DomainError(f"segments are not {family}-admissible")
    kw = {"budget": budget}
    if spec.has_undecidable_rules():
        kw["candidates"] = ()
    lhs = theta * sum((norm(x.project(E), spec, **kw).value for E in sets), Fraction(0))
    rhs = norm(x, spec, **kw).value
    report = Report("standard-inequality")
    report.add("lhs <= rhs", lhs <= rhs, lhs=lhs, rhs=rhs, theta=theta, family=str(family))
    report.values.update({"lhs": lhs, "rhs": rhs, "equality": lhs == rhs})
    return report.finish()


def l1_allowable_constant(xs: Sequence[FinVector], spec: SpaceSpec, grid: Sequence[int] = (-2, -1, 0, 1, 2), budget=None) -> Fraction:
    """Smallest ``C`` with ``sum|a_i| <= C ||sum a_i x_i||`` over a coefficient grid.

    A sampled quantity: the true constant is at least the returned value.
    """
    xs = list(xs)
    if not xs:
        raise DomainError("need at least one vector")
    seen: set[int] = set()
    for v in xs:
        if v.is_zero() or seen.intersection(v.support):
            raise DomainError("vectors must be non-zero and pairwise disjointly supported")
        seen.update(v.support)
    kw = {"budget": budget}
    if spec.has_undecidable_rules():
        kw["candidates"] = ()
    for v in xs:
        if norm(v, spec, **kw).value != 1:
            raise DomainError("vectors must have norm 1")
    if not family_member(sorted(v.minsupp for v in xs), FamilySpec("S", 1)):
        raise DomainError("minimal supports must form an S_1 set")
    best = Fraction(1)
    for coeffs in itertools.product(grid, repeat=len(xs)):
        l1 = sum(abs(Fraction(a)) for a in coeffs)
        if not l1:
            continue
        combo = FinVector()
        for a, v in zip(coeffs, xs):
            combo = combo + v * a
        best = max(best, l1 / norm(combo, spec, **kw).value)
    return best
