"""Exact rationals on the wire: always ``"p/q"`` strings."""
from __future__ import annotations

from fractions import Fraction
from typing import Any

from .errors import DomainError


def fmt(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse(value: Any) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int. Floats are refused (they are not exact)."""
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational: {value!r}") from exc
    raise DomainError(f"not a rational: {value!r}")


def ceil_log2_inverse(eps: Fraction) -> int:
    """Smallest k >= 0 with 2**k * eps >= 1, computed without floats."""
    k = 0
    while (eps.numerator << k) < eps.denominator:
        k += 1
    return k


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions (and tuples/sets) into JSON-friendly values."""
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj)]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj
