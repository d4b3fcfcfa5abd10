"""Finitely supported vectors and special convex combinations."""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence

from .errors import CarrierExhausted, DomainError
from .families import FamilySpec, FamilyTracker, family_member, greedy_blocks, max_weight_subfamily
from .rational import fmt, parse
from .report import Report


@dataclass(frozen=True)
class Interval:
    """Closed integer interval ``[lo, hi]``."""

    lo: int
    hi: int

    def __contains__(self, i: object) -> bool:
        return isinstance(i, int) and self.lo <= i <= self.hi


def _membership(E):
    if isinstance(E, Interval):
        return E.__contains__
    if isinstance(E, range):
        return E.__contains__
    keep = frozenset(int(i) for i in E)
    return keep.__contains__


class FinVector(Mapping):
    """Immutable finitely supported vector with exact rational coordinates.

    Zero coordinates are never stored, so ``len(x)`` is the support size and
    iteration runs over the support in increasing order.
    """

    __slots__ = ("_coords", "_support", "_hash")

    def __init__(self, coords: Mapping[int, Any] | Iterable[tuple[int, Any]] = ()):
        items = coords.items() if isinstance(coords, Mapping) else coords
        clean: dict[int, Fraction] = {}
        for i, v in items:
            i = int(i)
            if i < 1:
                raise DomainError(f"indices are positive integers, got {i}")
            v = parse(v) if isinstance(v, str) else Fraction(v)
            if v:
                clean[i] = clean.get(i, Fraction(0)) + v
                if not clean[i]:
                    del clean[i]
        self._support = tuple(sorted(clean))
        self._coords = {i: clean[i] for i in self._support}
        self._hash = None

    @classmethod
    def basis(cls, i: int, value=1) -> "FinVector":
        return cls({i: value})

    @classmethod
    def ones(cls, indices: Iterable[int]) -> "FinVector":
        return cls({i: 1 for i in indices})

    # Mapping protocol
    def __getitem__(self, i: int) -> Fraction:
        return self._coords.get(i, Fraction(0))

    def __iter__(self) -> Iterator[int]:
        return iter(self._support)

    def __len__(self) -> int:
        return len(self._support)

    def __contains__(self, i: object) -> bool:
        return i in self._coords

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FinVector):
            return self._coords == other._coords
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._coords.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {fmt(v)}" for i, v in self._coords.items())
        return f"FinVector({{{body}}})"

    # supports
    @property
    def support(self) -> tuple[int, ...]:
        return self._support

    @property
    def ran(self) -> Interval | None:
        return Interval(self._support[0], self._support[-1]) if self._support else None

    @property
    def minsupp(self) -> int:
        if not self._support:
            raise DomainError("zero vector has no support")
        return self._support[0]

    @property
    def maxsupp(self) -> int:
        if not self._support:
            raise DomainError("zero vector has no support")
        return self._support[-1]

    def is_zero(self) -> bool:
        return not self._support

    # algebra
    def __add__(self, other: "FinVector") -> "FinVector":
        merged = dict(self._coords)
        for i, v in other.items():
            merged[i] = merged.get(i, Fraction(0)) + v
        return FinVector(merged)

    def __neg__(self) -> "FinVector":
        return FinVector({i: -v for i, v in self._coords.items()})

    def __sub__(self, other: "FinVector") -> "FinVector":
        return self + (-other)

    def __mul__(self, scalar) -> "FinVector":
        scalar = Fraction(scalar)
        return FinVector({i: scalar * v for i, v in self._coords.items()})

    __rmul__ = __mul__

    def abs(self) -> "FinVector":
        return FinVector({i: abs(v) for i, v in self._coords.items()})

    def dot(self, other: Mapping[int, Fraction]) -> Fraction:
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return sum((v * big[i] for i, v in small.items() if i in big), Fraction(0))

    def project(self, E) -> "FinVector":
        """Restriction to ``E`` (a set, ``range`` or :class:`Interval`)."""
        keep = _membership(E)
        return FinVector({i: v for i, v in self._coords.items() if keep(i)})

    def linf(self) -> Fraction:
        return max((abs(v) for v in self._coords.values()), default=Fraction(0))

    def l1(self) -> Fraction:
        return sum((abs(v) for v in self._coords.values()), Fraction(0))

    def to_json(self) -> dict:
        return {"coords": {str(i): fmt(v) for i, v in self._coords.items()}}

    @classmethod
    def from_json(cls, data) -> "FinVector":
        if isinstance(data, Mapping) and "coords" in data:
            data = data["coords"]
        if isinstance(data, Mapping):
            return cls({int(k): parse(v) for k, v in data.items()})
        # list form: [[index, "p/q"], ...]
        return cls({int(k): parse(v) for k, v in data})


def is_block_sequence(xs: Sequence[FinVector]) -> bool:
    """Non-zero vectors with strictly successive ranges."""
    if any(x.is_zero() for x in xs):
        return False
    return all(a.maxsupp < b.minsupp for a, b in zip(xs, xs[1:]))


# ---------------------------------------------------------------------------
# Special convex combinations


def greedy_carrier(L: Iterable[int], n: int) -> tuple[int, ...]:
    """Initial segment of ``L`` forming a maximal ``S_n`` set.

    Consumes exactly the elements needed, so ``L`` may be infinite; raises
    :class:`CarrierExhausted` when a finite ``L`` ends first.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    tracker = FamilyTracker(FamilySpec("S", n))
    state = tracker.start()
    out: list[int] = []
    prev = 0
    for a in L:
        a = int(a)
        if a <= prev:
            raise DomainError("stream must be strictly increasing positive integers")
        prev = a
        state = tracker.push(state, a)
        out.append(a)
        if not any(state):  # every capacity used up: nothing more can join
            return tuple(out)
    raise CarrierExhausted(f"stream ended before a maximal S_{n} set was complete (got {len(out)} elements)")


def _average_weights(F: Sequence[int], n: int) -> dict[int, Fraction]:
    if n == 0:
        return {F[0]: Fraction(1)}
    blocks = greedy_blocks(F, n)
    share = Fraction(1, len(blocks))
    out: dict[int, Fraction] = {}
    for block in blocks:
        for i, v in _average_weights(block, n - 1).items():
            out[i] = share * v
    return out


def repeated_average(L: Iterable[int], n: int) -> FinVector:
    """The repeated average of order ``n`` on the greedy ``S_n`` carrier of ``L``."""
    return FinVector(_average_weights(greedy_carrier(L, n), n))


@dataclass
class SccCertificate:
    n: int
    eps: Fraction
    carrier: tuple[int, ...]
    smallness: Fraction
    total: Fraction
    in_family: bool
    norm_lb: Fraction | None = None
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def seminormalized(self) -> bool | None:
        return None if self.norm_lb is None else self.norm_lb >= Fraction(1, 2)

    def to_report(self) -> Report:
        report = Report("scc")
        report.add("carrier in S_n", self.in_family, carrier=list(self.carrier), n=self.n)
        report.add("coefficients sum to 1", self.total == 1, total=self.total)
        report.add("small on S_(n-1)", self.smallness < self.eps, smallness=self.smallness, eps=self.eps)
        if self.norm_lb is not None:
            report.add("seminormalized", self.seminormalized, norm=self.norm_lb)
        report.values.update(self.to_json())
        return report.finish()

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "eps": fmt(self.eps),
            "carrier": list(self.carrier),
            "smallness": fmt(self.smallness),
            "total": fmt(self.total),
            "ok": self.ok,
            "violations": list(self.violations),
        }
        if self.norm_lb is not None:
            out["norm_lb"] = fmt(self.norm_lb)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SccCertificate":
        return cls(
            n=int(data["n"]),
            eps=parse(data["eps"]),
            carrier=tuple(data["carrier"]),
            smallness=parse(data["smallness"]),
            total=parse(data["total"]),
            in_family=not any("carrier" in v for v in data.get("violations", [])),
            norm_lb=parse(data["norm_lb"]) if "norm_lb" in data else None,
            violations=list(data.get("violations", [])),
        )


def check_basic_scc(x: FinVector, n: int, eps) -> SccCertificate:
    """Check that ``x`` is a basic ``(n, eps)``-scc; the smallness sup is always reported."""
    eps = Fraction(eps)
    if n < 0:
        raise DomainError("n must be >= 0")
    if any(v < 0 for v in x.values()):
        raise DomainError("scc coefficients must be non-negative")
    carrier = x.support
    in_family = family_member(carrier, FamilySpec("S", n))
    total = sum(x.values(), Fraction(0))
    smallness = Fraction(0) if n == 0 else max_weight_subfamily(carrier, dict(x), FamilySpec("S", n - 1))
    violations = []
    if not in_family:
        violations.append("carrier not in S_n")
    if total != 1:
        violations.append("coefficients do not sum to 1")
    if not smallness < eps:
        violations.append("smallness not below eps")
    return SccCertificate(n, eps, carrier, smallness, total, in_family, violations=violations)


@dataclass
class Scc:
    """``scale * sum_i coeffs[i] * blocks[i]`` with the certificate of its shadow vector.

    ``blocks`` lists only the carrier blocks, in order.  A scaled scc keeps
    its scalar separately so the underlying certificate stays checkable.
    """

    blocks: tuple[FinVector, ...]
    coeffs: tuple[Fraction, ...]
    certificate: SccCertificate
    scale: Fraction = Fraction(1)

    @property
    def vector(self) -> FinVector:
        total = FinVector()
        for a, b in zip(self.coeffs, self.blocks):
            total = total + b * (a * self.scale)
        return total

    @property
    def shadow(self) -> FinVector:
        return FinVector({b.minsupp: a for a, b in zip(self.coeffs, self.blocks)})

    def scaled(self, scale) -> "Scc":
        return Scc(self.blocks, self.coeffs, self.certificate, Fraction(scale))

    def __iter__(self):
        # allows ``vector, certificate = make_scc(...)``
        yield self.vector
        yield self.certificate

    def to_json(self) -> dict:
        return {
            "blocks": [b.to_json() for b in self.blocks],
            "coeffs": [fmt(a) for a in self.coeffs],
            "scale": fmt(self.scale),
            "certificate": self.certificate.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Scc":
        return cls(
            tuple(FinVector.from_json(b) for b in data["blocks"]),
            tuple(parse(a) for a in data["coeffs"]),
            SccCertificate.from_json(data["certificate"]),
            parse(data.get("scale", "1")),
        )


def make_scc(blocks: Sequence[FinVector], n: int, eps, coeffs: Sequence | None = None) -> Scc:
    """Combine a block sequence into an ``(n, eps)``-scc.

    Without ``coeffs`` the repeated average over the minsupp stream picks the
    carrier (a prefix of ``blocks``); with ``coeffs`` (one per block, zeros
    allowed) the given combination is validated instead.  Validation failures
    show up as violations on the returned certificate.
    """
    blocks = list(blocks)
    if not blocks:
        raise DomainError("make_scc needs at least one block")
    if not is_block_sequence(blocks):
        raise DomainError("blocks must be non-zero with successive ranges")
    by_min = {b.minsupp: b for b in blocks}
    if coeffs is None:
        weights = _average_weights(greedy_carrier((b.minsupp for b in blocks), n), n)
    else:
        if len(coeffs) != len(blocks):
            raise DomainError("need one coefficient per block")
        weights = {b.minsupp: Fraction(a) for b, a in zip(blocks, coeffs) if a}
    shadow = FinVector(weights)
    cert = check_basic_scc(shadow, n, eps)
    chosen = tuple(by_min[i] for i in shadow.support)
    return Scc(chosen, tuple(shadow[i] for i in shadow.support), cert)
