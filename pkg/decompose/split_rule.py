"""
Rule decomposition.

A rule whose conclusion applies user functions is split into a start
rule holding the original premise, one mid rule per distinct function
occurrence carrying that function's trigger, and an end rule producing
the original conclusion from the computed values. Values travel in
linear ST facts keyed by the origin rule, the subterm and its parent.
Within one source rule no subterm is computed twice; across rules
everything is recomputed.
"""
import logging
from typing import Dict, Iterable, List, Optional, Sequence

from decompose.special_rules import special_rules
from decompose.subterms import TOP, FreshNames, Occurrence, SubtermTable, st_symbol
from errors.monitor_errors import DecompositionError
from protocol_spec.model import ExtendedRule, RuleKind
from terms.facts import Fact, Trigger
from terms.term import Term, Variable, contains_user_app, replace_subterms, variables

logger = logging.getLogger(__name__)


def _has_functions(rule: ExtendedRule) -> bool:
    return any(contains_user_app(a) for f in rule.conclusion for a in f.args)


def _action_terms(rule: ExtendedRule) -> List[Term]:
    terms = [t for pair in rule.equalities for t in pair]
    terms.extend(a for event in rule.events for a in event.args)
    return terms


class _Splitter:

    def __init__(self, rule: ExtendedRule):
        self.rule = rule
        self.table = SubtermTable(a for f in rule.conclusion for a in f.args)
        premise_vars = variables(*(a for f in rule.premise for a in f.args))
        self.premise_labels = {v.label for v in premise_vars}
        # premise variables carried by every ST fact
        self.carried = tuple(premise_vars)
        everything = list(self.carried) + [
            a for f in rule.conclusion for a in f.args
        ] + _action_terms(rule)
        self.fresh = FreshNames(v.label for v in variables(*everything))
        self.results: Dict[str, Variable] = {o.key: self.fresh(f"x_{o.key}") for o in self.table}
        self.start_facts: List[Fact] = []

    def extras(self, term: Term) -> tuple:
        return tuple(v for v in variables(term) if v.label not in self.premise_labels)

    def _st(self, sub: str, parent: str, extras: tuple, value: Optional[Term]) -> Fact:
        args = self.carried + extras + ((value,) if value is not None else ())
        return Fact(st_symbol(self.rule.name, sub, parent), args)

    def mid(self, occurrence: Occurrence) -> ExtendedRule:
        premise: List[Fact] = []
        trigger_args: List[Term] = []
        consumed = set()
        for position, arg in enumerate(occurrence.term.args):
            inner = self.table.nested(arg)
            if self.table.get(arg) is not None:
                inner = [self.table.get(arg)]
            if inner:
                for child in inner:
                    if child.key not in consumed:
                        consumed.add(child.key)
                        premise.append(
                            self._st(child.key, occurrence.key, self.extras(child.term), self.results[child.key])
                        )
                # a format around inner calls is rebuilt from their results
                trigger_args.append(replace_subterms(arg, {c.term: self.results[c.key] for c in inner}))
            elif self.extras(arg):
                trigger_args.append(arg)
            else:
                sub = f"{occurrence.key}a{position}"
                value = self.fresh(f"x_{sub}")
                self.start_facts.append(self._st(sub, occurrence.key, (), arg))
                premise.append(self._st(sub, occurrence.key, (), value))
                trigger_args.append(value)
        if not premise:
            token = self._st(f"t{occurrence.index}", occurrence.key, (), None)
            self.start_facts.append(token)
            premise.append(token)
        result = self.results[occurrence.key]
        extras = self.extras(occurrence.term)
        return ExtendedRule(
            name=f"{self.rule.name}_{occurrence.symbol}{occurrence.index}",
            premise=tuple(premise),
            conclusion=tuple(self._st(occurrence.key, parent, extras, result) for parent in occurrence.parents),
            trigger=Trigger(occurrence.symbol, tuple(trigger_args), result),
            role=self.rule.role,
            origin=self.rule.name,
            kind=RuleKind.MID,
        )

    def end(self) -> ExtendedRule:
        mapping = {o.term: self.results[o.key] for o in self.table}

        def substitute(term: Term) -> Term:
            replaced = replace_subterms(term, mapping)
            if contains_user_app(replaced):
                raise DecompositionError(
                    self.rule.name,
                    f"action term {term} applies a function that does not occur in the conclusion",
                )
            return replaced

        conclusion = tuple(
            Fact(f.symbol, tuple(replace_subterms(a, mapping) for a in f.args), f.persistent)
            for f in self.rule.conclusion
        )
        events = tuple(Fact(e.symbol, tuple(substitute(a) for a in e.args), e.persistent) for e in self.rule.events)
        equalities = tuple((substitute(a), substitute(b)) for a, b in self.rule.equalities)
        top = self.table.top_level()
        premise = tuple(
            self._st(o.key, TOP, self.extras(o.term), self.results[o.key]) for o in top
        )

        bound = set(self.premise_labels) | {v.label for f in premise for v in variables(*f.args)}
        produced = [a for f in conclusion for a in f.args] + [a for e in events for a in e.args]
        produced += [t for pair in equalities for t in pair]
        unbound = [v.label for v in variables(*produced) if v.label not in bound]
        if unbound:
            raise DecompositionError(
                self.rule.name,
                f"variables {', '.join(unbound)} are bound neither by the premise nor by a function argument",
            )
        return ExtendedRule(
            name=f"{self.rule.name}_end",
            premise=premise,
            conclusion=conclusion,
            equalities=equalities,
            events=events,
            role=self.rule.role,
            origin=self.rule.name,
            kind=RuleKind.END,
        )

    def start(self) -> ExtendedRule:
        return ExtendedRule(
            name=f"{self.rule.name}_start",
            premise=self.rule.premise,
            conclusion=tuple(self.start_facts),
            role=self.rule.role,
            origin=self.rule.name,
            kind=RuleKind.START,
        )


def split_rule(rule: ExtendedRule) -> List[ExtendedRule]:
    """Decompose ``rule`` into start, mid and end rules.

    A rule without user function applications in its conclusion is
    returned unchanged. Hints are added separately by ``attach_hints``.
    """
    if not _has_functions(rule):
        calls = [t for t in _action_terms(rule) if contains_user_app(t)]
        if calls:
            raise DecompositionError(
                rule.name,
                f"action term {calls[0]} applies a function that does not occur in the conclusion",
            )
        return [rule]
    if rule.trigger is not None or rule.hints:
        raise DecompositionError(
            rule.name, "carries a trigger or hints but also applies functions in its conclusion"
        )
    splitter = _Splitter(rule)
    mids = [splitter.mid(o) for o in splitter.table]
    end = splitter.end()
    start = splitter.start()
    logger.debug("split rule %s into %d rules", rule.name, len(mids) + 2)
    return [start] + mids + [end]


def _hint(start: ExtendedRule, mid: ExtendedRule) -> Optional[Trigger]:
    """Trigger of ``mid`` over the start rule's terms, None unless start feeds all of it"""
    produced = {f.symbol: f for f in start.conclusion}
    renaming: Dict[Term, Term] = {}
    for fact in mid.premise:
        source = produced.get(fact.symbol)
        if source is None:
            return None
        renaming.update((m, s) for m, s in zip(fact.args, source.args) if m != s)
    args = tuple(replace_subterms(a, renaming) for a in mid.trigger.args)
    return Trigger(mid.trigger.symbol, args, None)


def attach_hints(rules: Sequence[ExtendedRule]) -> List[ExtendedRule]:
    """Give each start rule the triggers of the mid rules it alone feeds"""
    mids: Dict[str, List[ExtendedRule]] = {}
    for rule in rules:
        if rule.kind is RuleKind.MID:
            mids.setdefault(rule.origin, []).append(rule)
    result = []
    for rule in rules:
        if rule.kind is not RuleKind.START or rule.trigger is not None:
            result.append(rule)
            continue
        hints = []
        for mid in mids.get(rule.origin, ()):
            hint = _hint(rule, mid)
            if hint is not None and hint not in hints:
                hints.append(hint)
        result.append(ExtendedRule(
            name=rule.name,
            premise=rule.premise,
            conclusion=rule.conclusion,
            hints=tuple(hints),
            equalities=rule.equalities,
            events=rule.events,
            role=rule.role,
            origin=rule.origin,
            kind=rule.kind,
        ))
    return result


def split_ruleset(rules: Iterable[ExtendedRule], include_special: bool = True) -> List[ExtendedRule]:
    """Decompose every rule, add the In/Out/Fr rules, drop duplicates"""
    output: List[ExtendedRule] = []
    for rule in rules:
        output.extend(split_rule(rule))
    output = attach_hints(output)
    if include_special:
        output.extend(special_rules())
    unique = list(dict.fromkeys(output))
    names: Dict[str, ExtendedRule] = {}
    for rule in unique:
        if names.setdefault(rule.name, rule) is not rule:
            raise DecompositionError(rule.name, "two different rules share this name after decomposition")
    logger.info("decomposed %d rules", len(unique))
    return unique
