"""
Term algebra used by rules: variables, names, function and format
applications, and literal bitstrings and naturals.

Runtime values are plain ``bytes`` or ``int`` (naturals); terms only ever
appear in rule patterns.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Tuple, Union

Value = Union[bytes, int]

_HEX_LITERAL = re.compile(r"^0x((?:[0-9a-fA-F]{2})*)$")


class Sort(Enum):
    MSG = "msg"
    FRESH = "fresh"
    PUB = "pub"
    NAT = "nat"


class SymbolKind(Enum):
    USER = "user"
    BUILTIN_IO = "builtin-io"
    FORMAT = "format"
    TUPLE = "tuple"


_SORT_PREFIX = {Sort.MSG: "", Sort.FRESH: "~", Sort.PUB: "$", Sort.NAT: "%"}


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arity: int
    kind: SymbolKind = SymbolKind.USER

    def __str__(self):
        return f"{self.name}/{self.arity}"


def tuple_symbol(arity: int) -> FunctionSymbol:
    return FunctionSymbol("<>", arity, SymbolKind.TUPLE)


class Term:
    """Base class of all term nodes"""

    def children(self) -> Tuple["Term", ...]:
        return ()


@dataclass(frozen=True)
class Variable(Term):
    label: str
    sort: Sort = Sort.MSG

    def __str__(self):
        return f"{_SORT_PREFIX[self.sort]}{self.label}"


@dataclass(frozen=True)
class PubName(Term):
    value: bytes

    def __str__(self):
        return f"'{pub_name_literal(self.value)}'"


@dataclass(frozen=True)
class FreshMark(Term):
    label: str

    def __str__(self):
        return f"~'{self.label}'"


@dataclass(frozen=True)
class App(Term):
    symbol: FunctionSymbol
    args: Tuple[Term, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != self.symbol.arity:
            raise ValueError(
                f"{self.symbol.name} expects {self.symbol.arity} arguments, got {len(self.args)}"
            )

    def children(self):
        return self.args

    def __str__(self):
        inner = ", ".join(str(a) for a in self.args)
        if self.symbol.kind is SymbolKind.TUPLE:
            return f"<{inner}>"
        return f"{self.symbol.name}({inner})"


@dataclass(frozen=True)
class FormatApp(Term):
    format: str
    args: Tuple[Term, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def children(self):
        return self.args

    def __str__(self):
        return f"{self.format}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class BitLit(Term):
    value: bytes

    def __str__(self):
        return "0x" + self.value.hex()


@dataclass(frozen=True)
class NatLit(Term):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"natural literal must be non-negative, got {self.value}")

    def __str__(self):
        return f"%{self.value}"


def pub_name_bytes(literal: str) -> bytes:
    """Encode the text between the quotes of a public name literal.

    ``'0x…'`` with an even number of hex digits denotes raw bytes,
    anything else its ASCII encoding.
    """
    match = _HEX_LITERAL.match(literal)
    if match and len(literal) > 2:
        return bytes.fromhex(match.group(1))
    return literal.encode("ascii")


def pub_name_literal(value: bytes) -> str:
    """Inverse of :func:`pub_name_bytes` up to byte equality"""
    try:
        text = value.decode("ascii")
    except UnicodeDecodeError:
        text = None
    if (
        text is not None
        and text.isprintable()
        and "'" not in text
        and not _HEX_LITERAL.match(text)
    ):
        return text
    return "0x" + value.hex()


def value_to_term(value: Value) -> Term:
    if isinstance(value, int):
        return NatLit(value)
    return BitLit(value)


def format_value(value: Value) -> str:
    if isinstance(value, int):
        return f"%{value}"
    return "0x" + value.hex()


def iter_subterms(term: Term) -> Iterator[Term]:
    """Pre-order traversal, the term itself first"""
    yield term
    for child in term.children():
        yield from iter_subterms(child)


def variables(*terms: Term) -> List[Variable]:
    """Variables of the given terms in order of first occurrence"""
    seen = {}
    for term in terms:
        for sub in iter_subterms(term):
            if isinstance(sub, Variable) and sub.label not in seen:
                seen[sub.label] = sub
    return list(seen.values())



def is_user_app(term: Term) -> bool:
    return isinstance(term, App) and term.symbol.kind is SymbolKind.USER


def contains_user_app(term: Term) -> bool:
    return any(is_user_app(sub) for sub in iter_subterms(term))


def replace_subterms(term: Term, mapping: dict) -> Term:
    """Replace every subterm found in ``mapping``, outermost first"""
    if term in mapping:
        return mapping[term]
    if isinstance(term, App):
        return App(term.symbol, tuple(replace_subterms(a, mapping) for a in term.args))
    if isinstance(term, FormatApp):
        return FormatApp(term.format, tuple(replace_subterms(a, mapping) for a in term.args))
    return term
