"""Injective codings into even indices.

:class:`CodingFunction` assigns to each sequence of successive intervals the
least unused element ``t`` of ``2 L_2`` with ``n_t >= rho(max E_last) +
max E_last``.  :class:`HistoryCoder` does the same for histories of special
sequences in the interval/G-operation space, so that the weight of the next
member determines the history.  Both tables persist to JSON.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from typing import Iterator, Mapping, Sequence

from .errors import DomainError
from .parameters import ParameterSystem
from .rational import fmt, jsonable

IntervalSeq = tuple[tuple[int, int], ...]


def as_interval_sequence(seq) -> IntervalSeq:
    """Validate successive non-empty closed intervals ``E_1 < E_2 < ...``."""
    out = []
    for item in seq:
        if isinstance(item, Mapping):
            lo, hi = int(item["lo"]), int(item["hi"])
        else:
            lo, hi = (int(v) for v in item)
        if lo < 1 or hi < lo:
            raise DomainError(f"[{lo}, {hi}] is not a non-empty interval of positive integers")
        if out and lo <= out[-1][1]:
            raise DomainError("intervals must be successive")
        out.append((lo, hi))
    if not out:
        raise DomainError("interval sequence must be non-empty")
    return tuple(out)


class _Slots:
    """Increasing candidates ``t`` with "least free at or after position p" lookups."""

    def __init__(self, params: ParameterSystem, accept):
        self.params = params
        self.accept = accept
        self.values: list[int] = []
        self.parent: list[int] = []
        self._k = 0

    def value(self, p: int) -> int:
        while len(self.values) <= p:
            self._k += 1
            if self.accept(self._k):
                self.values.append(2 * self._k)
                self.parent.append(len(self.parent))
        return self.values[p]

    def first_position(self, ok) -> int:
        """Least position whose value satisfies the monotone predicate ``ok``."""
        hi = 0
        while not ok(self.value(hi)):
            hi = 2 * hi + 1
        lo = (hi - 1) // 2 if hi else 0
        while lo < hi:
            mid = (lo + hi) // 2
            if ok(self.value(mid)):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def find(self, p: int) -> int:
        self.value(p)
        root = p
        while True:
            self.value(root)
            if self.parent[root] == root:
                break
            root = self.parent[root]
        while self.parent[p] != root:
            self.parent[p], p = root, self.parent[p]
        return root

    def take(self, p: int) -> None:
        self.value(p + 1)
        self.parent[p] = p + 1

    def position_of(self, t: int) -> int | None:
        p = self.first_position(lambda v: v >= t)
        return p if self.value(p) == t else None


class CodingFunction:
    """Memoised ``sigma`` from interval sequences into ``2 L_2``."""

    def __init__(self, params: ParameterSystem):
        self.params = params
        self._table: dict[IntervalSeq, int] = {}
        self._owner: dict[int, IntervalSeq] = {}
        self._slots = _Slots(params, params.in_L2)

    def __len__(self) -> int:
        return len(self._table)

    def requirement(self, seq: IntervalSeq) -> int:
        top = seq[-1][1]
        return self.params.rho(top) + top

    def lookup(self, seq) -> int | None:
        return self._table.get(as_interval_sequence(seq))

    def sigma(self, seq) -> int:
        seq = as_interval_sequence(seq)
        hit = self._table.get(seq)
        if hit is not None:
            return hit
        need = self.requirement(seq)
        p = self._slots.find(self._slots.first_position(lambda t: self.params.n(t) >= need))
        t = self._slots.value(p)
        self._slots.take(p)
        self._table[seq] = t
        self._owner[t] = seq
        return t

    __call__ = sigma

    def items(self) -> list[tuple[IntervalSeq, int]]:
        return list(self._table.items())

    def export(self) -> dict:
        return {
            "kind": "sigma",
            "params": self.params.to_json(),
            "assignments": [[[list(e) for e in seq], t] for seq, t in self._table.items()],
        }

    def digest(self) -> str:
        return table_hash(self.export())

    @classmethod
    def load(cls, data: Mapping, params: ParameterSystem | None = None) -> "CodingFunction":
        """Rebuild a table; every stored value is re-checked for injectivity and growth."""
        cf = cls(params or ParameterSystem.from_json(data["params"]))
        for raw, t in data.get("assignments", []):
            seq = as_interval_sequence(raw)
            t = int(t)
            if t in cf._owner or seq in cf._table:
                raise DomainError(f"table is not injective at {t}")
            if t % 2 or not cf.params.in_L2(t // 2):
                raise DomainError(f"{t} is not in 2 L_2")
            if cf.params.n(t) < cf.requirement(seq):
                raise DomainError(f"stored value {t} violates the growth condition")
            p = cf._slots.position_of(t)
            cf._slots.take(p)
            cf._table[seq] = t
            cf._owner[t] = seq
        return cf

    def growth_ok(self, seq, t: int) -> bool:
        return self.params.n(t) >= self.requirement(as_interval_sequence(seq))


def table_hash(data) -> str:
    blob = json.dumps(jsonable(data), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def sequences_with_max(top: int) -> list[IntervalSeq]:
    """All successive interval sequences whose last interval ends at ``top``,
    ordered by number of intervals and then endpoints."""
    found: list[IntervalSeq] = []

    def build(prefix: list[tuple[int, int]], start: int):
        for lo in range(start, top + 1):
            found.append(tuple(prefix) + ((lo, top),))
            for hi in range(lo, top):
                build(prefix + [(lo, hi)], hi + 1)

    build([], 1)
    return sorted(found, key=lambda s: (len(s), s))


def canonical_sequences() -> Iterator[IntervalSeq]:
    """Every interval sequence exactly once: by largest endpoint, length, endpoints."""
    for top in itertools.count(1):
        yield from sequences_with_max(top)


# ---------------------------------------------------------------------------
# Special sequences of the interval/G-operation space


def profile(f) -> tuple[tuple[int, str], ...]:
    """Unsigned coefficient profile ``|f|`` of a functional, hashable and exact."""
    coeffs = f.coefficients() if hasattr(f, "coefficients") else f
    return tuple((i, fmt(abs(v))) for i, v in sorted(coeffs.items()))


class HistoryCoder:
    """Weight indices ``2 j_i`` determined by the history ``(w(f_k), |f_k|)_{k<i}``.

    A fresh history gets the least unused ``t`` in ``2 L_2`` with
    ``m_t > maxsupp(f_{i-1}) * m_{t_{i-1}}``; the assignment is memoised and
    injective, so the weight of ``f_i`` pins down the history before it.
    """

    def __init__(self, params: ParameterSystem):
        self.params = params
        self._table: dict[tuple, int] = {}
        self._owner: dict[int, tuple] = {}
        self._slots = _Slots(params, params.in_L2)

    @staticmethod
    def key(history: Sequence) -> tuple:
        """``history`` lists ``(weight index, functional)`` pairs."""
        return tuple((int(t), profile(f)) for t, f in history)

    def lookup(self, history: Sequence) -> int | None:
        return self._table.get(self.key(history))

    def assign(self, history: Sequence) -> int:
        key = self.key(history)
        if not key:
            raise DomainError("the first member's weight is free; histories start at length 1")
        hit = self._table.get(key)
        if hit is not None:
            return hit
        prev_t, prev_profile = key[-1]
        bound = max(i for i, _ in prev_profile) * self.params.m(prev_t) if prev_profile else self.params.m(prev_t)
        p = self._slots.find(self._slots.first_position(lambda t: self.params.m(t) > bound))
        t = self._slots.value(p)
        self._slots.take(p)
        self._table[key] = t
        self._owner[t] = key
        return t

    def force(self, history: Sequence, t: int) -> None:
        """Record an arbitrary assignment (used to build inconsistent tables in tests)."""
        self._table[self.key(history)] = int(t)
        self._owner.setdefault(int(t), self.key(history))

    def injective(self) -> bool:
        return len(set(self._table.values())) == len(self._table)

    def histories_for(self, t: int) -> list[tuple]:
        return [k for k, v in self._table.items() if v == t]

    def export(self) -> dict:
        return {
            "kind": "w4-history",
            "params": self.params.to_json(),
            "assignments": [[[[t, [list(c) for c in prof]] for t, prof in key], v] for key, v in self._table.items()],
        }

    @classmethod
    def load(cls, data: Mapping, params: ParameterSystem | None = None) -> "HistoryCoder":
        coder = cls(params or ParameterSystem.from_json(data["params"]))
        for raw, v in data.get("assignments", []):
            key = tuple((int(t), tuple((int(i), str(c)) for i, c in prof)) for t, prof in raw)
            coder._table[key] = int(v)
            coder._owner.setdefault(int(v), key)
            p = coder._slots.position_of(int(v))
            if p is not None:
                coder._slots.take(p)
        return coder
