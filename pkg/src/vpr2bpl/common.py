"""Shared utilities: immutable maps, bounds, error types, exit codes."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Tuple

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class Vpr2BplError(Exception):
    """Base class for all tool errors."""


class MalformedProgramError(Vpr2BplError):
    """Static validation failure (type error, unknown name, bad structure)."""


class ParseError(Vpr2BplError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ResourceLimitError(Vpr2BplError):
    """The bounded-exhaustive engine exceeded its enumeration budget."""


class FormatError(Vpr2BplError):
    """A serialized artifact (certificate, hints, report) is malformed."""


class FrozenMap(Mapping):
    """Immutable, hashable mapping used for stores, heaps and masks."""

    __slots__ = ("_d", "_hash")

    def __init__(self, items: Iterable = ()):  # accepts dict or pair-iterable
        object.__setattr__(self, "_d", dict(items))
        object.__setattr__(self, "_hash", None)

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self) -> Iterator:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(frozenset(self._d.items()))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other) -> bool:
        if isinstance(other, FrozenMap):
            return self._d == other._d
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v!r}" for k, v in sorted(self._d.items(), key=repr))
        return f"FrozenMap({{{inner}}})"

    def set(self, key, value) -> "FrozenMap":
        d = dict(self._d)
        d[key] = value
        return FrozenMap(d)

    def set_many(self, pairs: Iterable[Tuple]) -> "FrozenMap":
        d = dict(self._d)
        for k, v in pairs:
            d[k] = v
        return FrozenMap(d)

    def remove(self, key) -> "FrozenMap":
        d = dict(self._d)
        del d[key]
        return FrozenMap(d)


EMPTY_MAP = FrozenMap()


@dataclass(frozen=True)
class Bounds:
    """Finite enumeration domains for the bounded-exhaustive engine.

    ``refs`` is the number of distinct non-null references; integers range over
    ``[int_lo, int_hi]``; permission amounts enumerate multiples of
    ``1/perm_denom`` in ``[0, 1]``.  ``max_pairs`` caps the total number of
    enumerated state pairs before the engine aborts with a resource error.
    """

    refs: int = 2
    int_lo: int = -2
    int_hi: int = 2
    perm_denom: int = 2
    max_pairs: int = 10_000_000

    def __post_init__(self):
        if self.refs < 1 or self.perm_denom < 1 or self.int_lo > self.int_hi:
            raise MalformedProgramError(f"invalid bounds: {self}")

    def ints(self) -> list[int]:
        return list(range(self.int_lo, self.int_hi + 1))

    def perms(self) -> list[Fraction]:
        return [Fraction(k, self.perm_denom) for k in range(self.perm_denom + 1)]

    def ref_names(self) -> list[str]:
        return [f"r{i}" for i in range(1, self.refs + 1)]


DEFAULT_BOUNDS = Bounds()


class PairBudget:
    """Mutable counter shared across one validation run."""

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def charge(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ResourceLimitError(
                f"enumeration budget exceeded: {self.used} > {self.limit} state pairs"
            )
