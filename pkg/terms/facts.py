"""
Facts, triggers and the immutable fact multiset that makes up a
configuration's state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, Tuple

from terms.term import Term, Value, format_value


@dataclass(frozen=True)
class Fact:
    """Fact pattern over terms, as written in a rule"""
    symbol: str
    args: Tuple[Term, ...] = field(default=())
    persistent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        bang = "!" if self.persistent else ""
        return f"{bang}{self.symbol}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class GroundFact:
    """Fact over runtime values"""
    symbol: str
    args: Tuple[Value, ...] = field(default=())
    persistent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        bang = "!" if self.persistent else ""
        return f"{bang}{self.symbol}({', '.join(format_value(a) for a in self.args)})"

    def sort_key(self):
        return (self.symbol, self.persistent, tuple((type(a).__name__, a) for a in self.args))


@dataclass(frozen=True)
class Trigger:
    """Pattern for one program event: symbol, argument patterns, result pattern.

    Used both for a rule's trigger and for its hints.
    """
    symbol: str
    args: Tuple[Term, ...] = field(default=())
    result: Term = None

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return f"{self.symbol}({', '.join(str(a) for a in self.args)}) -> {self.result}"


class FactMultiset:
    """Immutable multiset of linear ground facts plus a set of persistent ones.

    Facts are bucketed by symbol so rule matching only scans candidates
    with the right name. ``add`` and ``remove`` return new instances.
    """

    __slots__ = ("_linear", "_persistent", "_hash")

    def __init__(self, facts: Iterable[GroundFact] = ()):
        self._linear: Dict[str, Dict[GroundFact, int]] = {}
        self._persistent: Dict[str, FrozenSet[GroundFact]] = {}
        self._hash = None
        for fact in facts:
            self._insert(fact)

    @classmethod
    def _from_parts(cls, linear, persistent):
        instance = cls.__new__(cls)
        instance._linear = linear
        instance._persistent = persistent
        instance._hash = None
        return instance

    def _insert(self, fact: GroundFact):
        if fact.persistent:
            bucket = self._persistent.get(fact.symbol, frozenset())
            self._persistent[fact.symbol] = bucket | {fact}
        else:
            bucket = self._linear.setdefault(fact.symbol, {})
            bucket[fact] = bucket.get(fact, 0) + 1

    def add(self, facts: Iterable[GroundFact]) -> "FactMultiset":
        facts = list(facts)
        if not facts:
            return self
        linear = dict(self._linear)
        persistent = dict(self._persistent)
        copied = set()
        for fact in facts:
            if fact.persistent:
                persistent[fact.symbol] = persistent.get(fact.symbol, frozenset()) | {fact}
                continue
            if fact.symbol not in copied:
                linear[fact.symbol] = dict(linear.get(fact.symbol, {}))
                copied.add(fact.symbol)
            bucket = linear[fact.symbol]
            bucket[fact] = bucket.get(fact, 0) + 1
        return FactMultiset._from_parts(linear, persistent)

    def remove(self, facts: Iterable[GroundFact]) -> "FactMultiset":
        """Multiset difference on linear facts; persistent facts are ignored.

        Raises ``ValueError`` if a linear fact is not present often enough.
        """
        facts = [f for f in facts if not f.persistent]
        if not facts:
            return self
        linear = dict(self._linear)
        copied = set()
        for fact in facts:
            if fact.symbol not in copied:
                linear[fact.symbol] = dict(linear.get(fact.symbol, {}))
                copied.add(fact.symbol)
            bucket = linear[fact.symbol]
            count = bucket.get(fact, 0)
            if count == 0:
                raise ValueError(f"fact {fact} is not in the multiset")
            if count == 1:
                del bucket[fact]
            else:
                bucket[fact] = count - 1
            if not bucket:
                del linear[fact.symbol]
                copied.discard(fact.symbol)
        return FactMultiset._from_parts(linear, dict(self._persistent))

    def count(self, fact: GroundFact) -> int:
        if fact.persistent:
            return 1 if fact in self._persistent.get(fact.symbol, ()) else 0
        return self._linear.get(fact.symbol, {}).get(fact, 0)

    def __contains__(self, fact: GroundFact) -> bool:
        return self.count(fact) > 0

    def candidates(self, symbol: str, persistent: bool) -> Iterator[Tuple[GroundFact, int]]:
        if persistent:
            for fact in self._persistent.get(symbol, ()):
                yield fact, 1
        else:
            yield from self._linear.get(symbol, {}).items()

    def linear_facts(self) -> Iterator[GroundFact]:
        for bucket in self._linear.values():
            for fact, count in bucket.items():
                for _ in range(count):
                    yield fact

    def persistent_facts(self) -> Iterator[GroundFact]:
        for bucket in self._persistent.values():
            yield from bucket

    def symbols(self) -> FrozenSet[str]:
        return frozenset(self._linear) | frozenset(self._persistent)

    def __iter__(self) -> Iterator[GroundFact]:
        yield from self.linear_facts()
        yield from self.persistent_facts()

    def __len__(self) -> int:
        linear = sum(sum(b.values()) for b in self._linear.values())
        return linear + sum(len(b) for b in self._persistent.values())

    def _canonical(self):
        linear = frozenset(
            (fact, count) for bucket in self._linear.values() for fact, count in bucket.items()
        )
        return linear, frozenset(self.persistent_facts())

    def __eq__(self, other):
        if not isinstance(other, FactMultiset):
            return NotImplemented
        return hash(self) == hash(other) and self._canonical() == other._canonical()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._canonical())
        return self._hash

    def sort_key(self):
        return tuple(sorted(f.sort_key() for f in self))

    def __repr__(self):
        return "{" + ", ".join(str(f) for f in sorted(self, key=GroundFact.sort_key)) + "}"
