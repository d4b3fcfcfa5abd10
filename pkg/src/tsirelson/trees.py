"""Tree-analyses of norming functionals.

A node is either a signed leaf ``±e_i*`` or an operation node.  Weighted
operation nodes (``allowable``, ``block``, ``dependent``, ``special-w4``)
carry ``weight`` and the weight index ``j``; ``g-op`` nodes halve and restrict
their single child to ``[F_1, F_2) ∪ [F_3, F_4) ∪ ...``; ``projection`` nodes
restrict their child to a closed interval.

Dependent nodes also carry their defining data: ``intervals`` holds
``E_1 < E_2 < ...`` as closed ``(lo, hi)`` pairs and ``blocks[i][k]`` the
1-based interval indices ``A_k`` used by the ``k``-th child of member ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import DomainError, NotSchreierError
from .rational import fmt, parse
from .vectors import FinVector

WEIGHTED_OPS = ("allowable", "block", "dependent", "special-w4")
OPS = WEIGHTED_OPS + ("g-op", "projection")
OP_ALIASES = {
    "even-allowable": "allowable",
    "odd-dependent": "dependent",
    "A-block": "block",
    "odd-special-W4": "special-w4",
    "G-op": "g-op",
}

Path = tuple[int, ...]


def g_intervals(F: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Half-open pieces ``[F_1, F_2), [F_3, F_4), ...`` of a Schreier set of even size."""
    F = tuple(int(a) for a in F)
    if not F or len(F) % 2:
        raise NotSchreierError(f"F must have even positive size, got {len(F)}")
    if any(a >= b for a, b in zip(F, F[1:])) or F[0] < 1:
        raise NotSchreierError("F must be strictly increasing positive integers")
    if len(F) > F[0]:
        raise NotSchreierError(f"|F| = {len(F)} exceeds min F = {F[0]}")
    return tuple((F[2 * p], F[2 * p + 1]) for p in range(len(F) // 2))


def in_g_set(i: int, pieces) -> bool:
    return any(a <= i < b for a, b in pieces)


@dataclass(frozen=True, eq=True)
class TreeFunctional:
    index: int | None = None
    sign: int = 1
    op: str | None = None
    weight: Fraction | None = None
    j: int | None = None
    children: tuple["TreeFunctional", ...] = ()
    F: tuple[int, ...] | None = None
    interval: tuple[int, int] | None = None
    intervals: tuple[tuple[int, int], ...] | None = None
    blocks: tuple[tuple[tuple[int, ...], ...], ...] | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.index is not None:
            if self.index < 1 or self.sign not in (1, -1) or self.children:
                raise DomainError("a leaf needs a positive index, sign ±1 and no children")
            return
        op = OP_ALIASES.get(self.op, self.op)
        object.__setattr__(self, "op", op)
        if op not in OPS:
            raise DomainError(f"unknown operation {self.op!r}")
        object.__setattr__(self, "children", tuple(self.children))
        if op == "g-op":
            object.__setattr__(self, "weight", Fraction(1, 2))
            object.__setattr__(self, "F", tuple(self.F or ()))
            g_intervals(self.F)
        elif op == "projection":
            if self.interval is None:
                raise DomainError("projection node needs an interval")
            object.__setattr__(self, "interval", tuple(self.interval))
        else:
            if self.weight is None:
                raise DomainError(f"{op} node needs a weight")
            object.__setattr__(self, "weight", Fraction(self.weight))
        if op in ("g-op", "projection") and len(self.children) != 1:
            raise DomainError(f"{op} node takes exactly one child")

    # -- constructors --------------------------------------------------------

    @classmethod
    def leaf(cls, index: int, sign: int = 1) -> "TreeFunctional":
        return cls(index=index, sign=sign)

    @classmethod
    def node(cls, weight, children, op: str = "allowable", j: int | None = None, **extra) -> "TreeFunctional":
        return cls(op=op, weight=Fraction(weight), j=j, children=tuple(children), **extra)

    @classmethod
    def g_op(cls, child: "TreeFunctional", F: Sequence[int]) -> "TreeFunctional":
        return cls(op="g-op", F=tuple(F), children=(child,))

    @classmethod
    def project(cls, child: "TreeFunctional", lo: int, hi: int) -> "TreeFunctional":
        return cls(op="projection", interval=(lo, hi), children=(child,))

    @property
    def is_leaf(self) -> bool:
        return self.index is not None

    @property
    def multiplier(self) -> Fraction:
        return Fraction(1) if self.is_leaf or self.op == "projection" else self.weight

    def _keeps(self, i: int) -> bool:
        if self.op == "g-op":
            return in_g_set(i, g_intervals(self.F))
        if self.op == "projection":
            return self.interval[0] <= i <= self.interval[1]
        return True

    # -- traversal -------------------------------------------------------------

    def walk(self, path: Path = ()) -> Iterator[tuple[Path, "TreeFunctional"]]:
        """Pre-order traversal yielding ``(path, node)``."""
        yield path, self
        for pos, child in enumerate(self.children):
            yield from child.walk(path + (pos,))

    def node_at(self, path: Path) -> "TreeFunctional":
        node = self
        for pos in path:
            if not 0 <= pos < len(node.children):
                raise DomainError(f"no node at path {list(path)}")
            node = node.children[pos]
        return node

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def leaves(self) -> Iterator[tuple[int, Fraction]]:
        """Surviving leaves as ``(index, sign * tag)``; leaves cut by restrictions are skipped."""
        yield from self._leaves(Fraction(1), ())

    def _leaves(self, tag: Fraction, filters):
        if self.is_leaf:
            if all(keep(self.index) for keep in filters):
                yield self.index, self.sign * tag
            return
        if self.op in ("g-op", "projection"):
            filters = filters + (self._keeps,)
        for child in self.children:
            yield from child._leaves(tag * self.multiplier, filters)

    def coefficients(self) -> FinVector:
        if "coeffs" not in self._cache:
            total: dict[int, Fraction] = {}
            for i, c in self.leaves():
                total[i] = total.get(i, Fraction(0)) + c
            self._cache["coeffs"] = FinVector(total)
        return self._cache["coeffs"]

    @property
    def support(self) -> tuple[int, ...]:
        return self.coefficients().support

    def evaluate(self, x: Mapping[int, Fraction]) -> Fraction:
        return evaluate(self, x)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.index, "sign": self.sign}
        out: dict = {"op": self.op, "children": [c.to_json() for c in self.children]}
        if self.op not in ("projection",):
            out["w"] = fmt(self.weight)
        if self.j is not None:
            out["j"] = self.j
        if self.F is not None:
            out["F"] = list(self.F)
        if self.interval is not None:
            out["interval"] = list(self.interval)
        if self.intervals is not None:
            out["intervals"] = [list(e) for e in self.intervals]
        if self.blocks is not None:
            out["blocks"] = [[list(a) for a in member] for member in self.blocks]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "TreeFunctional":
        if "leaf" in data:
            return cls.leaf(int(data["leaf"]), int(data.get("sign", 1)))
        try:
            op = data["op"]
            children = tuple(cls.from_json(c) for c in data.get("children", []))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed functional: {exc}") from None
        weight = data.get("w", data.get("weight"))
        return cls(
            op=op,
            weight=parse(weight) if weight is not None else None,
            j=data.get("j"),
            children=children,
            F=tuple(data["F"]) if "F" in data else None,
            interval=tuple(data["interval"]) if "interval" in data else None,
            intervals=tuple(tuple(e) for e in data["intervals"]) if "intervals" in data else None,
            blocks=tuple(tuple(tuple(a) for a in m) for m in data["blocks"]) if "blocks" in data else None,
        )


def evaluate(f: TreeFunctional, x: Mapping[int, Fraction]) -> Fraction:
    """``f(x)`` as the sum over surviving leaves of ``sign * tag * x_index``."""
    return sum((c * Fraction(x.get(i, 0)) for i, c in f.leaves()), Fraction(0))


def evaluate_recursive(f: TreeFunctional, x: FinVector) -> Fraction:
    """Independent route: ``w * sum(child(x))`` with restrictions applied to ``x``."""
    if f.is_leaf:
        return f.sign * x[f.index]
    if f.op == "g-op":
        pieces = g_intervals(f.F)
        x = x.project([i for i in x.support if in_g_set(i, pieces)])
    elif f.op == "projection":
        x = x.project(range(f.interval[0], f.interval[1] + 1))
    return f.multiplier * sum((evaluate_recursive(c, x) for c in f.children), Fraction(0))


def tag_ord(f: TreeFunctional, path: Sequence[int]) -> tuple[Fraction, int]:
    """Product of strict-ancestor multipliers and the branch length of a node."""
    tag = Fraction(1)
    node = f
    for pos in path:
        if not 0 <= pos < len(node.children):
            raise DomainError(f"node {list(path)} not found")
        tag *= node.multiplier
        node = node.children[pos]
    return tag, len(path)


def from_coefficients(weight, coeffs: Mapping[int, Fraction], op: str = "allowable", j: int | None = None) -> TreeFunctional:
    """A weighted node over signed leaves; helper for tests and builders."""
    leaves = [TreeFunctional.leaf(i, 1 if v > 0 else -1) for i, v in sorted(coeffs.items()) if v]
    return TreeFunctional.node(weight, leaves, op=op, j=j)
