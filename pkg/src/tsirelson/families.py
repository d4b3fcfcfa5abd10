"""Families of finite subsets of the positive integers.

Three hierarchies are supported:

* ``A_k`` -- all sets with at most ``k`` elements;
* ``S_n`` -- Schreier families, ``S_0`` = singletons and the empty set, and
  ``S_{n+1}`` = unions ``F_1 u ... u F_k`` of successive ``S_n`` sets with
  ``k <= min F_1``;
* ``SM_n`` -- the modified variant where the ``F_i`` need only be pairwise
  disjoint.  The residual cardinality condition is read as
  ``k <= min(F_1 u ... u F_k)``.

Membership in ``S_n`` is decided greedily.  Because ``S_n`` is hereditary
(closed under subsets) and spreading (closed under pushing elements to the
right), cutting an increasing sequence into *maximal* initial ``S_{n-1}``
pieces uses the fewest pieces of any decomposition: if an optimal
decomposition had a shorter first piece, moving elements from the second piece
into the first keeps the first piece in ``S_{n-1}`` (greedy maximality) and
shrinks the second (hereditary) while its minimum only grows (spreading).
:class:`FamilyTracker` runs that greedy online, one element at a time, which is
what the dynamic programs in :mod:`tsirelson.norm` need.

``SM_n`` membership is decided by exhaustive search and never relies on the
equality ``S_n = SM_n``; that equality is checked, not assumed.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DomainError, LimitExceeded

EXHAUSTIVE_LIMIT = 12

_SPEC_RE = re.compile(r"^\s*(A|SM|S)\s*_?\s*(\d+)\s*$")


@dataclass(frozen=True)
class FamilySpec:
    kind: str  # "A", "S" or "SM"
    index: int

    def __post_init__(self):
        if self.kind not in ("A", "S", "SM"):
            raise DomainError(f"unknown family kind {self.kind!r}")
        if not isinstance(self.index, int) or self.index < 0:
            raise DomainError(f"family index must be a non-negative int, got {self.index!r}")
        if self.kind == "A" and self.index < 1:
            raise DomainError("A_k requires k >= 1")

    @classmethod
    def parse(cls, value) -> "FamilySpec":
        """Accept ``"S1"``, ``"SM2"``, ``"A3"``, a dict or a FamilySpec."""
        if isinstance(value, FamilySpec):
            return value
        if isinstance(value, Mapping):
            return cls(str(value["kind"]), int(value["index"]))
        if isinstance(value, str):
            m = _SPEC_RE.match(value)
            if m:
                return cls(m.group(1), int(m.group(2)))
        raise DomainError(f"cannot parse family {value!r}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    def to_json(self) -> dict:
        return {"kind": self.kind, "index": self.index}


def as_finite_set(elements: Iterable[int]) -> tuple[int, ...]:
    """Validate and return a strictly increasing tuple of positive integers."""
    out = tuple(int(e) for e in elements)
    for a in out:
        if a < 1:
            raise DomainError(f"elements must be positive integers, got {a}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise DomainError(f"set must be strictly increasing: {out}")
    return out


def _canonical(elements: Iterable[int]) -> tuple[int, ...]:
    return as_finite_set(sorted(set(int(e) for e in elements)))


# ---------------------------------------------------------------------------
# Online greedy membership

REJECT = "reject"


class FamilyTracker:
    """Incremental membership test for increasing sequences.

    The state after pushing ``a_1 < ... < a_t`` is ``None`` (nothing pushed),
    an element count (``A`` families) or, for Schreier families, the tuple of
    remaining capacities of the currently open greedy block at levels
    ``1..n``.  ``push`` returns :data:`REJECT` as soon as the sequence leaves
    the family; since the families are hereditary nothing can be appended
    afterwards either.

    ``max_elements`` clamps the Schreier level: a set with ``t`` elements lies
    in ``S_n`` for some ``n`` iff it lies in ``S_t`` (sets with minimum 1 are
    members only as singletons, every other ``t``-set is already in ``S_t``),
    so levels above the number of elements that will ever be pushed are
    redundant.
    """

    def __init__(self, spec: FamilySpec, max_elements: int | None = None):
        self.spec = FamilySpec.parse(spec)
        self.level = self.spec.index
        if self.spec.kind != "A" and max_elements is not None:
            self.level = min(self.level, max(max_elements, 0))

    def start(self):
        return None

    def push(self, state, a: int):
        if self.spec.kind == "A":
            count = 0 if state is None else state
            return count + 1 if count < self.spec.index else REJECT
        n = self.level
        if state is None:
            return (a - 1,) * n
        for lvl in range(n):
            if state[lvl] > 0:
                return (a - 1,) * lvl + (state[lvl] - 1,) + state[lvl + 1:]
        return REJECT

    def accepts(self, elements: Sequence[int]) -> bool:
        state = self.start()
        for a in elements:
            state = self.push(state, a)
            if state is REJECT:
                return False
        return True


# ---------------------------------------------------------------------------
# Membership


def family_member(F: Iterable[int], spec) -> bool:
    spec = FamilySpec.parse(spec)
    elems = _canonical(F)
    if spec.kind == "A":
        return len(elems) <= spec.index
    if spec.kind == "S":
        return FamilyTracker(spec, max_elements=len(elems)).accepts(elems)
    return modified_member(elems, spec.index)


def modified_member(F: Iterable[int], n: int) -> bool:
    """Exhaustive decision of ``F in SM_n``."""
    elems = _canonical(F)
    if len(elems) > EXHAUSTIVE_LIMIT * 2:
        raise LimitExceeded(f"exhaustive SM search capped at {EXHAUSTIVE_LIMIT * 2} elements")
    return _sm_member(elems, n)


@lru_cache(maxsize=None)
def _sm_member(elems: tuple[int, ...], n: int) -> bool:
    if len(elems) <= 1:
        return True
    if n == 0:
        return False
    return _sm_min_blocks(elems, n) <= elems[0]


@lru_cache(maxsize=None)
def _sm_min_blocks(elems: tuple[int, ...], n: int) -> float:
    """Fewest pairwise disjoint ``SM_{n-1}`` blocks covering ``elems``."""
    if not elems:
        return 0
    head, rest = elems[0], elems[1:]
    best = float("inf")
    # the block holding the smallest remaining element; enumerating it this way
    # visits every set partition exactly once
    for mask in range(1 << len(rest)):
        block = (head,) + tuple(rest[i] for i in range(len(rest)) if mask >> i & 1)
        if not _sm_member(block, n - 1):
            continue
        remaining = tuple(rest[i] for i in range(len(rest)) if not mask >> i & 1)
        cand = 1 + _sm_min_blocks(remaining, n)
        if cand < best:
            best = cand
    return best


@lru_cache(maxsize=None)
def _schreier_definitional(elems: tuple[int, ...], n: int) -> bool:
    if len(elems) <= 1:
        return True
    if n == 0:
        return False
    limit = elems[0]
    # try every composition into successive pieces, at most ``limit`` of them
    for cuts in range(1, min(limit, len(elems)) + 1):
        for positions in itertools.combinations(range(1, len(elems)), cuts - 1):
            bounds = (0,) + positions + (len(elems),)
            if all(_schreier_definitional(elems[a:b], n - 1) for a, b in zip(bounds, bounds[1:])):
                return True
    return False


def schreier_member_bruteforce(F: Iterable[int], n: int) -> bool:
    """Decide ``F in S_n`` straight from the inductive definition (oracle)."""
    elems = _canonical(F)
    if len(elems) > EXHAUSTIVE_LIMIT + 4:
        raise LimitExceeded("definitional Schreier oracle capped at 16 elements")
    return _schreier_definitional(elems, n)


# ---------------------------------------------------------------------------
# Maximal subsets and greedy decompositions


def maximal_family_subset(L: Iterable[int], spec) -> tuple[int, ...]:
    """Longest initial segment of the increasing stream ``L`` lying in the family.

    ``L`` may be infinite (e.g. ``itertools.count(4)``).  If a finite ``L`` is
    exhausted first, all of ``L`` is returned.
    """
    spec = FamilySpec.parse(spec)
    if spec.kind == "SM":
        raise DomainError("maximal subsets are only defined here for A and S families")
    tracker = FamilyTracker(spec)
    state = tracker.start()
    out: list[int] = []
    prev = 0
    for a in L:
        a = int(a)
        if a <= prev:
            raise DomainError("stream must be strictly increasing positive integers")
        prev = a
        nxt = tracker.push(state, a)
        if nxt is REJECT:
            break
        state = nxt
        out.append(a)
    if not out:
        raise DomainError("L must be non-empty")
    return tuple(out)


def greedy_blocks(F: Sequence[int], n: int) -> list[tuple[int, ...]]:
    """Cut ``F`` into maximal successive ``S_{n-1}`` pieces (``n >= 1``)."""
    if n < 1:
        raise DomainError("greedy_blocks needs n >= 1")
    tracker = FamilyTracker(FamilySpec("S", n - 1))
    blocks: list[list[int]] = []
    state = REJECT
    for a in F:
        nxt = REJECT if state is REJECT else tracker.push(state, a)
        if nxt is REJECT:
            blocks.append([])
            nxt = tracker.push(tracker.start(), a)
        blocks[-1].append(a)
        state = nxt
    return [tuple(b) for b in blocks]


# ---------------------------------------------------------------------------
# Admissibility


def is_admissible(segments: Sequence[Iterable[int]], spec, mode: str = "admissible") -> bool:
    """``mode`` is ``"admissible"`` (successive) or ``"allowable"`` (disjoint)."""
    if mode not in ("admissible", "allowable"):
        raise DomainError(f"unknown mode {mode!r}")
    segs = [_canonical(s) for s in segments]
    if any(not s for s in segs):
        raise DomainError("segments must be non-empty")
    if mode == "admissible":
        if any(a[-1] >= b[0] for a, b in zip(segs, segs[1:])):
            return False
    else:
        seen: set[int] = set()
        for s in segs:
            if seen.intersection(s):
                return False
            seen.update(s)
    mins = [s[0] for s in segs]
    if len(set(mins)) != len(mins):
        return False
    return family_member(mins, spec)


# ---------------------------------------------------------------------------
# Weight maximisation


def max_weight_subfamily(F: Iterable[int], weights: Mapping[int, Fraction], spec) -> Fraction:
    """``max { sum_{i in G} w_i : G subset of F, G in family }`` (exact).

    Runs a forward dynamic program over the elements of ``F`` whose state is
    the greedy tracker state, so every reachable chosen prefix is summarised
    by its capacities.  ``SM`` families fall back to exhaustive search.
    """
    spec = FamilySpec.parse(spec)
    elems = _canonical(F)
    w = {i: Fraction(weights.get(i, 0)) for i in elems}
    if any(v < 0 for v in w.values()):
        raise DomainError("weights must be non-negative")
    if spec.kind == "SM":
        return max_weight_subfamily_exhaustive(elems, w, spec)
    if spec.kind == "A":
        return sum(sorted(w.values(), reverse=True)[: spec.index], Fraction(0))
    tracker = FamilyTracker(spec, max_elements=len(elems))
    frontier: dict = {tracker.start(): Fraction(0)}
    for a in elems:
        if w[a] == 0:
            continue
        nxt = dict(frontier)
        for state, total in frontier.items():
            pushed = tracker.push(state, a)
            if pushed is REJECT:
                continue
            cand = total + w[a]
            if cand > nxt.get(pushed, -1):
                nxt[pushed] = cand
        frontier = nxt
    return max(frontier.values())


def max_weight_subfamily_exhaustive(
    F: Iterable[int], weights: Mapping[int, Fraction], spec, limit: int = EXHAUSTIVE_LIMIT
) -> Fraction:
    """Brute force over all subsets; the oracle for :func:`max_weight_subfamily`."""
    spec = FamilySpec.parse(spec)
    elems = _canonical(F)
    if len(elems) > limit:
        raise LimitExceeded(f"exhaustive search capped at {limit} elements")
    best = Fraction(0)
    for mask in range(1, 1 << len(elems)):
        G = [elems[i] for i in range(len(elems)) if mask >> i & 1]
        if spec.kind == "S":
            member = schreier_member_bruteforce(G, spec.index)
        elif spec.kind == "SM":
            member = modified_member(G, spec.index)
        else:
            member = len(G) <= spec.index
        if member:
            total = sum((Fraction(weights.get(i, 0)) for i in G), Fraction(0))
            best = max(best, total)
    return best


def subsets(ground: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All subsets of ``ground`` as increasing tuples (bitmask order)."""
    ground = tuple(ground)
    for mask in range(1 << len(ground)):
        yield tuple(ground[i] for i in range(len(ground)) if mask >> i & 1)
