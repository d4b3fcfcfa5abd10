"""Parameter sequences and space descriptions.

The production system is ``m_1 = 2, m_{j+1} = m_j^5`` and ``n_1 = 4,
n_{j+1} = 15 s_j n_j`` with ``s_j = log2(m_{j+1}^3)``.  Its values explode
immediately (``n_2 = 900``), so every computation that enumerates Schreier
sets accepts an arbitrary :class:`ParameterSystem`; the toy systems defined at
the bottom are the ones the test-suite runs on.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

from .errors import DomainError
from .families import FamilySpec
from .rational import ceil_log2_inverse, fmt, parse


def default_l(n: int, eps: Fraction) -> int:
    """Search budget standing in for the existence constant ``l(n, eps)``.

    Returns ``n + ceil(log2(1/eps))``.  This is a heuristic, not a certified
    constant; callers must re-check the scc properties they rely on.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if n < 1:
        raise DomainError("n must be positive")
    return n + ceil_log2_inverse(eps)


def identity_l(n: int, eps: Fraction) -> int:
    return n


def _seq_from(spec, name: str) -> tuple[Callable[[int], int], Any]:
    """Turn a JSON-ish description into ``j -> int`` plus its serial form."""
    if callable(spec):
        return spec, "callable"
    if isinstance(spec, str):
        if spec == "pow2":
            return (lambda j: 1 << j), spec
        if spec == "identity":
            return (lambda j: j), spec
        raise DomainError(f"unknown {name} sequence {spec!r}")
    if isinstance(spec, Sequence):
        values = tuple(int(v) for v in spec)

        def table(j: int) -> int:
            if j > len(values):
                raise DomainError(f"{name}_{j} not given (table has {len(values)} entries)")
            return values[j - 1]

        return table, list(values)
    raise DomainError(f"cannot interpret {name} sequence {spec!r}")


class ParameterSystem:
    """Sequences ``m_j``, ``n_j``, the constant ``l(n, eps)`` and ``L_1/L_2``.

    ``m`` and ``n`` are callables, 1-indexed tables, ``"pow2"``/``"identity"``,
    or ``"paper"`` for the production recurrences.  ``L1`` is ``"odds"``,
    ``"evens"`` or an explicit list; a list decides membership up to its
    maximum and defers to the odd/even rule beyond it.
    """

    def __init__(self, m="paper", n="paper", l="default", L1="odds", name: str | None = None):
        self.name = name
        self._paper_m = m == "paper"
        self._paper_n = n == "paper"
        if self._paper_m:
            self._m, self._m_serial = (lambda j: 1 << 5 ** (j - 1)), "paper"
        else:
            self._m, self._m_serial = _seq_from(m, "m")
        if self._paper_n:
            self._n, self._n_serial = self._paper_n_value, "paper"
        else:
            self._n, self._n_serial = _seq_from(n, "n")
        self._l, self._l_serial = self._make_l(l)
        self._L1_serial = L1 if isinstance(L1, str) else sorted(int(v) for v in L1)
        if isinstance(L1, str):
            if L1 not in ("odds", "evens"):
                raise DomainError(f"unknown L1 {L1!r}")
            parity = 1 if L1 == "odds" else 0
            self._in_L1 = lambda k: k % 2 == parity
        else:
            listed = frozenset(self._L1_serial)
            bound = max(listed, default=0)
            self._in_L1 = lambda k: k in listed if k <= bound else k % 2 == 1
        self._cache: dict[tuple[str, int], int] = {}

    @staticmethod
    def _make_l(l):
        if callable(l):
            return l, "callable"
        if l == "default":
            return default_l, "default"
        if l == "identity":
            return identity_l, "identity"
        if isinstance(l, Sequence):
            table = {(int(n), parse(e)): int(v) for n, e, v in l}

            def lookup(n: int, eps: Fraction) -> int:
                return table.get((n, Fraction(eps)), default_l(n, eps))

            return lookup, [[n, fmt(e), v] for (n, e), v in sorted(table.items())]
        raise DomainError(f"cannot interpret l {l!r}")

    # -- sequences ---------------------------------------------------------

    def _paper_n_value(self, j: int) -> int:
        value = 4
        for i in range(1, j):
            value = 15 * (3 * 5 ** i) * value
        return value

    def _get(self, kind: str, j: int, fn) -> int:
        if not isinstance(j, int) or j < 1:
            raise DomainError(f"index must be a positive integer, got {j!r}")
        key = (kind, j)
        if key not in self._cache:
            self._cache[key] = int(fn(j))
        return self._cache[key]

    def m(self, j: int) -> int:
        return self._get("m", j, self._m)

    def n(self, j: int) -> int:
        return self._get("n", j, self._n)

    def s(self, j: int) -> int:
        """``log2(m_{j+1}^3)``; only defined when that cube is a power of two."""
        if self._paper_m:
            return self._get("s", j, lambda k: 3 * 5 ** k)
        cube = self.m(j + 1) ** 3
        if cube & (cube - 1):
            raise DomainError(f"m_{j + 1}^3 is not a power of two")
        return cube.bit_length() - 1

    def l(self, n: int, eps: Fraction) -> int:
        value = int(self._l(n, Fraction(eps)))
        if value < n:
            raise DomainError(f"l({n}, {eps}) = {value} violates l >= n")
        return value

    def in_L1(self, k: int) -> bool:
        return bool(self._in_L1(k))

    def in_L2(self, k: int) -> bool:
        return not self._in_L1(k)

    def rho_index(self, n: int) -> int:
        """Minimal ``s`` with ``n^2 <= m_{2s}``."""
        if n < 1:
            raise DomainError("rho is defined for positive integers")
        s = 1
        while n * n > self.m(2 * s):
            s += 1
        return s

    def rho(self, n: int) -> int:
        s = self.rho_index(n)
        m2s = self.m(2 * s)
        return self.l(self.n(2 * s), Fraction(1, m2s * m2s))

    def check(self, prefix: int = 8) -> list[str]:
        """Invariant violations detectable on ``1..prefix`` (empty list when fine)."""
        problems = []
        try:
            ms = [self.m(j) for j in range(1, prefix + 1)]
            ns = [self.n(j) for j in range(1, prefix + 1)]
        except DomainError:
            ms = []
            j = 1
            while True:
                try:
                    ms.append(self.m(j))
                except DomainError:
                    break
                j += 1
            ns = [self.n(i) for i in range(1, len(ms) + 1)]
        if ms and ms[0] < 2:
            problems.append("m_1 must be >= 2")
        if any(b <= a for a, b in zip(ms, ms[1:])):
            problems.append("m must be strictly increasing")
        if any(v < 1 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
            problems.append("n must be positive and strictly increasing")
        window = range(1, 4 * prefix + 1)
        if not any(self.in_L1(k) for k in window) or not any(self.in_L2(k) for k in window):
            problems.append("L1 and L2 must both be non-empty on the checked prefix")
        return problems

    def to_json(self) -> dict:
        return {"m": self._m_serial, "n": self._n_serial, "l": self._l_serial, "L1": self._L1_serial}

    @classmethod
    def from_json(cls, data: Mapping) -> "ParameterSystem":
        return cls(
            m=data.get("m", "paper"),
            n=data.get("n", "paper"),
            l=data.get("l", "default"),
            L1=data.get("L1", "odds"),
            name=data.get("name"),
        )


# ---------------------------------------------------------------------------
# Closure rules

RULE_KINDS = ("block", "allowable", "dependent", "special-w4", "g-op")
IMPLICIT_RULES = ("sign-change", "projection", "interval-projection")
_ALIASES = {
    "even-allowable": ("allowable", None),
    "odd-dependent": ("dependent", None),
    "A-block": ("block", "A"),
    "odd-special-W4": ("special-w4", None),
    "G-op": ("g-op", None),
}


@dataclass(frozen=True)
class Rule:
    """One closure rule.

    ``family`` may be a full family (``"S1"``), a bare kind (``"S"``/``"A"``,
    index taken as ``n_j``) or ``None`` (Schreier ``S_{n_j}``).  ``theta``
    overrides the space's weight for ``j``.
    """

    kind: str
    j: int | None = None
    family: str | None = None
    theta: Fraction | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise DomainError(f"unknown rule kind {self.kind!r}")
        if self.theta is not None:
            object.__setattr__(self, "theta", Fraction(self.theta))

    @classmethod
    def from_json(cls, data) -> "Rule | None":
        if isinstance(data, str):
            data = {"kind": data}
        kind = data["kind"]
        if kind in IMPLICIT_RULES:
            return None
        family = data.get("family")
        if kind in _ALIASES:
            kind, implied = _ALIASES[kind]
            family = family or implied
        theta = data.get("theta")
        return cls(kind, data.get("j"), family, parse(theta) if theta is not None else None)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.j is not None:
            out["j"] = self.j
        if self.family is not None:
            out["family"] = self.family
        if self.theta is not None:
            out["theta"] = fmt(self.theta)
        return out


@dataclass(frozen=True)
class Operation:
    """A rule resolved against a parameter system."""

    kind: str
    family: FamilySpec
    theta: Fraction
    j: int | None

    @property
    def mode(self) -> str:
        return "allowable" if self.kind == "allowable" else "admissible"


@dataclass
class SpaceSpec:
    params: ParameterSystem
    rules: list[Rule] = field(default_factory=list)
    theta_overrides: dict[int, Fraction] = field(default_factory=dict)
    odd_enabled: bool = True
    name: str | None = None

    def theta(self, j: int) -> Fraction:
        if j in self.theta_overrides:
            return self.theta_overrides[j]
        return Fraction(1, self.params.m(j))

    def resolve(self, rule: Rule) -> Operation:
        if rule.family is not None and rule.family not in ("S", "A", "SM"):
            family = FamilySpec.parse(rule.family)
        else:
            if rule.j is None:
                raise DomainError(f"rule {rule} needs either j or an explicit family")
            family = FamilySpec(rule.family or "S", self.params.n(rule.j))
        if rule.theta is not None:
            theta = rule.theta
        elif rule.kind == "g-op":
            theta = Fraction(1, 2)
        else:
            if rule.j is None:
                raise DomainError(f"rule {rule} needs either j or an explicit theta")
            theta = self.theta(rule.j)
        if not 0 < theta <= 1:
            raise DomainError(f"weight {theta} outside (0, 1]")
        return Operation(rule.kind, family, theta, rule.j)

    def _wildcard(self, rule: Rule) -> bool:
        return rule.j is None and rule.kind != "g-op" and (rule.family in (None, "S", "A", "SM") or rule.theta is None)

    def expand(self, rule: Rule, support_size: int) -> list[Rule]:
        """Concrete rules for a rule without ``j`` (every index of the rule's parity).

        Stops at the first ``j`` with ``n_j >= support_size``: beyond it the
        family restricted to the support no longer grows while the weight
        keeps shrinking, so later indices never matter for such vectors.
        """
        if not self._wildcard(rule):
            return [rule]
        j = 3 if rule.kind in ("dependent", "special-w4") else 2
        out = []
        while True:
            out.append(replace(rule, j=j))
            if self.params.n(j) >= support_size:
                return out
            j += 2

    def operations(self, kinds: Sequence[str] | None = None, support_size: int | None = None) -> list[Operation]:
        ops = []
        for rule in self.rules:
            if rule.kind == "dependent" and not self.odd_enabled:
                continue
            if kinds is not None and rule.kind not in kinds:
                continue
            if self._wildcard(rule):
                if support_size is None:
                    continue
                ops.extend(self.resolve(r) for r in self.expand(rule, max(support_size, 1)))
            else:
                ops.append(self.resolve(rule))
        return ops

    def rule_matching(self, kind: str, j: int | None) -> Operation | None:
        """The operation a tree node of this kind and index must obey, if any."""
        for rule in self.rules:
            if rule.kind != kind:
                continue
            if rule.j == j:
                return self.resolve(rule)
            if self._wildcard(rule) and j is not None:
                parity = 1 if kind in ("dependent", "special-w4") else 0
                if j % 2 == parity and j >= 1:
                    return self.resolve(replace(rule, j=j))
        return None

    def rule_for(self, j: int, kinds: Sequence[str] = ("block", "allowable")) -> Operation | None:
        for kind in kinds:
            op = self.rule_matching(kind, j)
            if op is not None:
                return op
        return None

    def has_undecidable_rules(self) -> bool:
        return any(
            r.kind in ("special-w4", "g-op") or (r.kind == "dependent" and self.odd_enabled) for r in self.rules
        )

    def fragment(self) -> "SpaceSpec":
        """The decidable part: block and allowable operations only."""
        return replace(self, rules=[r for r in self.rules if r.kind in ("block", "allowable")])

    def to_json(self) -> dict:
        out = dict(self.params.to_json())
        out["rules"] = [r.to_json() for r in self.rules]
        out["theta"] = {str(j): fmt(t) for j, t in sorted(self.theta_overrides.items())}
        out["odd_enabled"] = self.odd_enabled
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "SpaceSpec":
        if isinstance(data, str):
            return named_space(data)
        if "preset" in data:
            return named_space(data["preset"])
        params = ParameterSystem.from_json(data)
        rules = [r for r in (Rule.from_json(d) for d in data.get("rules", [])) if r is not None]
        expanded = []
        for r in rules:
            if isinstance(r.j, list):
                expanded.extend(replace(r, j=int(j)) for j in r.j)
            else:
                expanded.append(r)
        theta = data.get("theta", {})
        if isinstance(theta, Mapping):
            overrides = {int(k): parse(v) for k, v in theta.items()}
        else:
            overrides = {i + 1: parse(v) for i, v in enumerate(theta)}
        spec = cls(params, expanded, overrides, bool(data.get("odd_enabled", True)), data.get("name"))
        spec.operations(support_size=1)  # resolve eagerly so bad rules fail at load time
        return spec


# ---------------------------------------------------------------------------
# Ready-made systems


def paper_parameters() -> ParameterSystem:
    return ParameterSystem("paper", "paper", "default", "odds", name="paper")


def toy_parameters() -> ParameterSystem:
    """``m_j = 2^j``, ``n_j = j``, ``l(n, eps) = n``; odd/even partition."""
    return ParameterSystem("pow2", "identity", "identity", "odds", name="toy")


def admi_parameters() -> ParameterSystem:
    """``m_j = 2^j`` with ``n_j = 10 j n_{j-1}``, fast enough for the
    ``S_{n_j/5}`` allowability bound to hold level by level."""
    ns = [1]
    for j in range(2, 9):
        ns.append(10 * j * ns[-1])
    return ParameterSystem("pow2", ns, "identity", "odds", name="admi-toy")


def tsirelson_toy() -> SpaceSpec:
    """``T[(S_1, 1/2)]``: the Tsirelson-type space with a single operation."""
    return SpaceSpec(toy_parameters(), [Rule("block", 2, "S1", Fraction(1, 2))], name="tsirelson")


def modified_tsirelson_toy() -> SpaceSpec:
    """``T_M[(S_1, 1/2)]``: the same operation on allowable sequences."""
    return SpaceSpec(toy_parameters(), [Rule("allowable", 2, "S1", Fraction(1, 2))], name="modified-tsirelson")


def a_toy() -> SpaceSpec:
    """``T[(A_3, 1/2)]``."""
    return SpaceSpec(toy_parameters(), [Rule("block", 2, "A3", Fraction(1, 2))], name="a3")


def a_toy_two_levels() -> SpaceSpec:
    """``T[(A_3, 1/2), (A_9, 1/8)]``."""
    rules = [Rule("block", 2, "A3", Fraction(1, 2)), Rule("block", 4, "A9", Fraction(1, 8))]
    return SpaceSpec(toy_parameters(), rules, name="a3-a9")


def toy_space() -> SpaceSpec:
    """Toy version of the coded space: allowable operations for every even
    index and dependent-sequence operations for every odd one."""
    rules = [Rule("allowable"), Rule("dependent")]
    return SpaceSpec(toy_parameters(), rules, name="toy-space")


def toy_w4() -> SpaceSpec:
    """Toy version of the interval/G-operation space."""
    rules = [Rule("block", None, "A"), Rule("special-w4", None, "A"), Rule("g-op")]
    params = ParameterSystem("pow2", "identity", "identity", "evens", name="toy-w4")
    return SpaceSpec(params, rules, name="toy-w4")


def admi_space() -> SpaceSpec:
    rules = [Rule("allowable", j) for j in (2, 4, 6)]
    return SpaceSpec(admi_parameters(), rules, name="admi-toy")


def paper_space() -> SpaceSpec:
    rules = [Rule("allowable"), Rule("dependent")]
    return SpaceSpec(paper_parameters(), rules, name="paper")


PRESETS: dict[str, Callable[[], SpaceSpec]] = {
    "tsirelson": tsirelson_toy,
    "modified-tsirelson": modified_tsirelson_toy,
    "a3": a_toy,
    "a3-a9": a_toy_two_levels,
    "toy-space": toy_space,
    "toy-w4": toy_w4,
    "admi-toy": admi_space,
    "paper": paper_space,
}


def named_space(name: str) -> SpaceSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
