"""
Syntactic matching of patterns against runtime values.

Matching is one-way: patterns may contain variables, values never do.
Format applications inside a pattern are matched by parsing the value
with the format's definition.
"""
import logging
from typing import List, Optional, Sequence

from errors.monitor_errors import EvaluationError, FormatError
from formats.format_string import fs_construct
from formats.registry import FormatRegistry
from terms.facts import Fact, FactMultiset, GroundFact, Trigger
from terms.substitution import EMPTY, Substitution
from terms.term import (
    App,
    BitLit,
    FormatApp,
    FreshMark,
    NatLit,
    PubName,
    Term,
    Value,
    Variable,
    value_to_term,
)

logger = logging.getLogger(__name__)


def _same(a: Value, b: Value) -> bool:
    return type(a) is type(b) and a == b


def evaluate(term: Term, subst: Substitution, formats: Optional[FormatRegistry] = None) -> Value:
    """Compute the runtime value of a term whose variables are all bound"""
    if isinstance(term, Variable):
        if term.label not in subst:
            raise EvaluationError(f"variable {term} is not bound")
        return subst[term.label]
    if isinstance(term, (PubName, BitLit)):
        return term.value
    if isinstance(term, NatLit):
        return term.value
    if isinstance(term, FormatApp):
        definition = _definition(term, formats)
        if len(term.args) != len(definition.params):
            raise EvaluationError(
                f"format {term.format} expects {len(definition.params)} arguments"
            )
        bindings = {
            param: evaluate(arg, subst, formats) for param, arg in zip(definition.params, term.args)
        }
        try:
            return fs_construct(definition, bindings)
        except FormatError as exc:
            raise EvaluationError(f"cannot construct {term}: {exc}") from exc
    if isinstance(term, FreshMark):
        raise EvaluationError(f"fresh name {term} has no runtime value")
    if isinstance(term, App):
        raise EvaluationError(f"function application {term} cannot be evaluated by the monitor")
    raise EvaluationError(f"unsupported term {term!r}")


def _definition(term: FormatApp, formats):
    if formats is None or term.format not in formats:
        raise EvaluationError(f"unknown format '{term.format}'")
    return formats.get(term.format)


def _evaluable(term: Term, subst: Substitution) -> bool:
    if isinstance(term, Variable):
        return term.label in subst
    if isinstance(term, (FreshMark, App)):
        return False
    return all(_evaluable(child, subst) for child in term.children())


def match_term(
    pattern: Term,
    value: Value,
    subst: Substitution = EMPTY,
    formats: Optional[FormatRegistry] = None,
) -> Optional[Substitution]:
    """Extend ``subst`` so that ``pattern`` evaluates to ``value``, or return None"""
    if isinstance(pattern, Variable):
        return subst.bind(pattern.label, value)
    if isinstance(pattern, (PubName, BitLit, NatLit)):
        return subst if _same(pattern.value, value) else None
    if isinstance(pattern, FormatApp):
        return _match_format(pattern, value, subst, formats)
    # function applications have no runtime value of their own
    return None


def _match_format(pattern: FormatApp, value: Value, subst, formats) -> Optional[Substitution]:
    if not isinstance(value, bytes):
        return None
    definition = _definition(pattern, formats)
    if _evaluable(pattern, subst):
        try:
            return subst if evaluate(pattern, subst, formats) == value else None
        except EvaluationError as exc:
            logger.debug("construction of %s failed while matching: %s", pattern, exc)
            return None
    if not definition.parseable:
        logger.debug("format %s is construction-only and its arguments are not bound", pattern.format)
        return None
    parsed = formats.match(pattern.format, value)
    if parsed is None:
        return None
    for param, arg in zip(definition.params, pattern.args):
        subst = match_term(arg, parsed[param], subst, formats)
        if subst is None:
            return None
    return subst


def match_terms(
    patterns: Sequence[Term],
    values: Sequence[Value],
    subst: Substitution = EMPTY,
    formats: Optional[FormatRegistry] = None,
) -> Optional[Substitution]:
    if len(patterns) != len(values):
        return None
    for pattern, value in zip(patterns, values):
        subst = match_term(pattern, value, subst, formats)
        if subst is None:
            return None
    return subst


def _match_ground_term(pattern: Term, ground: Term, subst, formats) -> Optional[Substitution]:
    if isinstance(ground, (App, FormatApp)):
        if type(pattern) is not type(ground):
            return None
        head = pattern.symbol if isinstance(pattern, App) else pattern.format
        other = ground.symbol if isinstance(ground, App) else ground.format
        if head != other or len(pattern.args) != len(ground.args):
            return None
        for sub_pattern, sub_ground in zip(pattern.args, ground.args):
            subst = _match_ground_term(sub_pattern, sub_ground, subst, formats)
            if subst is None:
                return None
        return subst
    if isinstance(ground, (PubName, BitLit, NatLit)):
        return match_term(pattern, ground.value, subst, formats)
    return None


def mgs(ground, pattern, formats: Optional[FormatRegistry] = None, subst: Substitution = EMPTY):
    """Most general substitution making ``pattern`` equal to ``ground``.

    ``ground`` is a runtime value, a ground term, or an event with
    ``name``/``args``/``ret``; an event is matched against a ``Trigger``.
    """
    if isinstance(pattern, Trigger):
        if ground.name != pattern.symbol or len(ground.args) != len(pattern.args):
            return None
        subst = match_terms(pattern.args, ground.args, subst, formats)
        if subst is None or pattern.result is None:
            return subst
        return match_term(pattern.result, ground.ret, subst, formats)
    if isinstance(ground, Term):
        return _match_ground_term(pattern, ground, subst, formats)
    return match_term(pattern, ground, subst, formats)


def apply_subst(term: Term, subst: Substitution, formats: Optional[FormatRegistry] = None) -> Term:
    """Instantiate bound variables; fully bound format applications become bit literals"""
    if isinstance(term, Variable):
        if term.label in subst:
            return value_to_term(subst[term.label])
        return term
    if isinstance(term, App):
        return App(term.symbol, tuple(apply_subst(a, subst, formats) for a in term.args))
    if isinstance(term, FormatApp):
        args = tuple(apply_subst(a, subst, formats) for a in term.args)
        instantiated = FormatApp(term.format, args)
        if formats is not None and term.format in formats and _evaluable(instantiated, EMPTY):
            return BitLit(evaluate(instantiated, EMPTY, formats))
        return instantiated
    return term


def ground_fact(fact: Fact, subst: Substitution, formats: Optional[FormatRegistry] = None) -> GroundFact:
    return GroundFact(
        fact.symbol, tuple(evaluate(a, subst, formats) for a in fact.args), fact.persistent
    )


def multiset_match(
    state: FactMultiset,
    premise: Sequence[Fact],
    formats: Optional[FormatRegistry] = None,
    subst: Substitution = EMPTY,
) -> List[Substitution]:
    """All distinct substitutions mapping ``premise`` into ``state``.

    Linear premise facts use pairwise distinct occurrences up to their
    multiplicity; persistent ones only need membership.
    """
    results = {}
    used = {}

    def search(index: int, current: Substitution):
        if index == len(premise):
            results.setdefault(current, None)
            return
        fact = premise[index]
        for candidate, count in list(state.candidates(fact.symbol, fact.persistent)):
            if len(candidate.args) != len(fact.args):
                continue
            if not fact.persistent and used.get(candidate, 0) >= count:
                continue
            extended = match_terms(fact.args, candidate.args, current, formats)
            if extended is None:
                continue
            if not fact.persistent:
                used[candidate] = used.get(candidate, 0) + 1
            search(index + 1, extended)
            if not fact.persistent:
                used[candidate] -= 1

    search(0, subst)
    return list(results)
