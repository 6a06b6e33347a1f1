"""Substitutions from variable labels to ground values"""
from __future__ import annotations

from typing import Dict, Iterator, Mapping, Optional

from terms.term import Value, format_value


class Substitution(Mapping[str, Value]):
    """Immutable, hashable binding map.

    ``bind`` and ``compose`` return ``None`` on a conflicting binding
    instead of raising, which is what matching needs.
    """

    __slots__ = ("_bindings", "_hash")

    def __init__(self, bindings: Optional[Mapping[str, Value]] = None):
        self._bindings: Dict[str, Value] = dict(bindings or {})
        self._hash = None

    def __getitem__(self, label: str) -> Value:
        return self._bindings[label]

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other):
        if isinstance(other, Substitution):
            return self._bindings == other._bindings
        if isinstance(other, Mapping):
            return self._bindings == dict(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset((k, type(v), v) for k, v in self._bindings.items()))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k}↦{format_value(v)}" for k, v in sorted(self._bindings.items()))
        return "{" + inner + "}"

    def bind(self, label: str, value: Value) -> Optional["Substitution"]:
        current = self._bindings.get(label)
        if current is not None:
            if type(current) is type(value) and current == value:
                return self
            return None
        extended = dict(self._bindings)
        extended[label] = value
        return Substitution(extended)

    def compose(self, other: Mapping[str, Value]) -> Optional["Substitution"]:
        result = self
        for label, value in other.items():
            result = result.bind(label, value)
            if result is None:
                return None
        return result


EMPTY = Substitution()
