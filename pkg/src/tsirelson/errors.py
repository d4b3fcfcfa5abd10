"""Exception hierarchy shared by every module."""


class TsirelsonError(Exception):
    """Base class for all library errors."""


class DomainError(TsirelsonError, ValueError):
    """An input violates an operation's precondition."""


class CarrierExhausted(DomainError):
    """A finite stream ran out before a greedy carrier could be completed."""


class NotSchreierError(DomainError):
    """A set handed to the G-operation is not an even-sized Schreier set."""


class UnsupportedRule(TsirelsonError):
    """The norm engine cannot decide the supremum for an enabled rule."""


class LimitExceeded(DomainError):
    """A hard size cap (support size, depth) was exceeded."""
