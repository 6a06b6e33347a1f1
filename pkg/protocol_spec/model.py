"""Data model of a parsed specification file and of the rules the monitor runs"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from formats.registry import FormatRegistry
from terms.facts import Fact, Trigger
from terms.term import FunctionSymbol, Term

MODE_MONITOR = "monitor"
MODE_REWRITE = "rewrite"

# Reserved action names
TRIG = "Trig"
HINT = "Hint"
EQ = "Eq"
EMIT = "Emit"

# Environment facts
IN = "In"
OUT = "Out"
FR = "Fr"

ST_PREFIX = "ST_"


@dataclass(frozen=True)
class RawBlock:
    """A top-level block the monitor does not interpret (lemma, restriction, ...)"""
    keyword: str
    text: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: Tuple[str, ...]
    body: str = field(compare=False)


@dataclass(frozen=True)
class RuleAst:
    name: str
    role: Optional[str] = None
    lets: Tuple[Tuple[str, Term], ...] = ()
    premise: Tuple[Fact, ...] = ()
    actions: Tuple[Fact, ...] = ()
    conclusion: Tuple[Fact, ...] = ()
    attributes: Tuple[Tuple[str, str], ...] = ()
    line: Optional[int] = field(default=None, compare=False)


class RuleKind(Enum):
    PLAIN = "plain"
    START = "start"
    MID = "mid"
    END = "end"
    SPECIAL = "special"


@dataclass(frozen=True)
class ExtendedRule:
    """Rule with its actions split into trigger, hints, equalities and events"""
    name: str
    premise: Tuple[Fact, ...] = ()
    conclusion: Tuple[Fact, ...] = ()
    trigger: Optional[Trigger] = None
    hints: Tuple[Trigger, ...] = ()
    equalities: Tuple[Tuple[Term, Term], ...] = ()
    events: Tuple[Fact, ...] = ()
    role: Optional[str] = None
    origin: Optional[str] = None
    kind: RuleKind = RuleKind.PLAIN

    @property
    def is_epsilon(self) -> bool:
        return self.trigger is None and not self.hints

    @property
    def hint_symbols(self) -> FrozenSet[str]:
        return frozenset(h.symbol for h in self.hints)


@dataclass
class SpecFile:
    name: Optional[str] = None
    functions: Dict[str, FunctionSymbol] = field(default_factory=dict)
    equations: List[Tuple[Term, Term]] = field(default_factory=list)
    macros: List[MacroDef] = field(default_factory=list)
    formats: FormatRegistry = field(default_factory=FormatRegistry, compare=False)
    rules: List[RuleAst] = field(default_factory=list)
    builtins: List[str] = field(default_factory=list)
    mode: str = MODE_MONITOR
    flags: FrozenSet[str] = field(default_factory=frozenset, compare=False)
    extra_blocks: List[RawBlock] = field(default_factory=list)

    def roles(self) -> List[str]:
        return sorted({r.role for r in self.rules if r.role is not None})

    def rule(self, name: str) -> RuleAst:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)


@dataclass(frozen=True)
class Lint:
    rule: Optional[str]
    code: str
    message: str

    def __str__(self):
        where = f"rule {self.rule}: " if self.rule else ""
        return f"[{self.code}] {where}{self.message}"


class ValidationReport:
    """Ordered collection of lint findings"""

    def __init__(self, lints=()):
        self.lints: List[Lint] = list(lints)

    def add(self, rule, code, message):
        self.lints.append(Lint(rule, code, message))

    def codes(self) -> List[str]:
        return [lint.code for lint in self.lints]

    def by_code(self, code: str) -> List[Lint]:
        return [lint for lint in self.lints if lint.code == code]

    def __iter__(self):
        return iter(self.lints)

    def __len__(self):
        return len(self.lints)

    def __eq__(self, other):
        return isinstance(other, ValidationReport) and self.lints == other.lints


@dataclass(frozen=True)
class Elaboration:
    rules: Tuple[ExtendedRule, ...]
    report: ValidationReport
