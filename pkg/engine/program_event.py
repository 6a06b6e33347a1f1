"""Observed program events and the event patterns a configuration permits"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

from terms.term import Term, Value, format_value


@dataclass(frozen=True)
class ProgramEvent:
    """A call ``name(args) -> ret`` with every value inline.

    ``ts`` and ``tid`` are passed through from the event line for logging
    and take no part in comparison.
    """
    name: str
    args: Tuple[Value, ...] = ()
    ret: Value = b""
    ts: Optional[int] = field(default=None, compare=False)
    tid: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        args = ", ".join(format_value(a) for a in self.args)
        return f"{self.name}({args}) -> {format_value(self.ret)}"


@dataclass(frozen=True)
class EventPattern:
    """A partially instantiated trigger or hint: an event some rule would accept"""
    name: str
    args: Tuple[Term, ...]
    result: Optional[Term]
    rule: str = field(compare=False)
    hint: bool = field(default=False, compare=False)

    def __str__(self):
        args = ", ".join(str(a) for a in self.args)
        result = "_" if self.result is None else str(self.result)
        return f"{self.name}({args}) -> {result}"
