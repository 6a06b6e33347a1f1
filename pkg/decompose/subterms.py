"""
Function occurrences of a rule's conclusion and the ST facts that carry
their values between the decomposed rules.

Occurrences are identified by structure: ``g(h(x), h(x))`` has two
occurrences, ``g(..)`` and ``h(x)``, and ``h(x)`` is called once per
start instance. The rule's conclusion is a set of values to compute,
so a repeated subterm does not stand for a second call.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from protocol_spec.model import ST_PREFIX
from terms.term import App, Term, Variable, is_user_app

TOP = "top"


@dataclass
class Occurrence:
    """A distinct user-function subterm; identical subterms share one entry"""
    index: int
    term: App
    parents: List[str] = field(default_factory=list)

    @property
    def key(self) -> str:
        return f"f{self.index}"

    @property
    def symbol(self) -> str:
        return self.term.symbol.name

    def add_parent(self, parent: str):
        if parent not in self.parents:
            self.parents.append(parent)


class SubtermTable:
    """Occurrences of one rule in pre-order of first appearance, with the
    parent relation: the nearest enclosing user-function occurrence or
    ``top``. Format applications and tuples are transparent.
    """

    def __init__(self, terms: Iterable[Term] = ()):
        self.occurrences: List[Occurrence] = []
        self._by_term: Dict[App, Occurrence] = {}
        for term in terms:
            self._visit(term, TOP)

    def _visit(self, term: Term, parent: str):
        if is_user_app(term):
            occurrence = self._by_term.get(term)
            if occurrence is None:
                occurrence = Occurrence(len(self.occurrences), term)
                self.occurrences.append(occurrence)
                self._by_term[term] = occurrence
            occurrence.add_parent(parent)
            parent = occurrence.key
        for child in term.children():
            self._visit(child, parent)

    def get(self, term: Term) -> Optional[Occurrence]:
        return self._by_term.get(term)

    def top_level(self) -> List[Occurrence]:
        return [o for o in self.occurrences if TOP in o.parents]

    def nested(self, term: Term) -> List[Occurrence]:
        """Nearest occurrences strictly inside ``term``, looking through formats and tuples"""
        found: List[Occurrence] = []
        for child in term.children():
            if is_user_app(child):
                inner = [self._by_term[child]]
            else:
                inner = self.nested(child)
            found.extend(o for o in inner if o not in found)
        return found

    def is_innermost(self, occurrence: Occurrence) -> bool:
        return not self.nested(occurrence.term)

    def __iter__(self):
        return iter(self.occurrences)

    def __len__(self):
        return len(self.occurrences)


def st_symbol(rule: str, sub: str, parent: str) -> str:
    return f"{ST_PREFIX}{rule}__{sub}__{parent}"


def parse_st_symbol(symbol: str) -> Optional[Tuple[str, str, str]]:
    """(rule, sub, parent) of an ST fact symbol, None for other facts"""
    if not symbol.startswith(ST_PREFIX):
        return None
    parts = symbol[len(ST_PREFIX):].rsplit("__", 2)
    if len(parts) != 3:
        return None
    return parts[0], parts[1], parts[2]


class FreshNames:
    """Variable names not used by a rule"""

    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)

    def __call__(self, base: str) -> Variable:
        label = base
        while label in self.taken:
            label += "_"
        self.taken.add(label)
        return Variable(label)
