"""
The monitoring core.

A ``MonitorState`` holds the set of configurations that explain the
events seen so far. Each event is dispatched through the rule index to
the rules whose trigger or hint carries the event's name; the
configurations that can process it are advanced, the others are
dropped, and an event no configuration can process is rejected.
Every function here is pure: states and configurations are immutable.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from config.config import Config
from engine.configuration import Configuration
from engine.diagnostics import (
    CONSTRUCTION_FAILED,
    EQ_FAILED,
    HINT_DROPPED,
    NO_RULE,
    STEP_FAILED,
    Diagnostics,
    Rejection,
)
from engine.program_event import EventPattern, ProgramEvent
from errors.monitor_errors import (
    ConfigurationLimitExceeded,
    EvaluationError,
    EventRejected,
    LikelyStreamViolation,
    NondeterministicRewriteError,
    WellFormednessError,
)
from formats.registry import FormatRegistry
from protocol_spec.model import MODE_MONITOR, MODE_REWRITE, ExtendedRule
from terms.facts import FactMultiset, GroundFact
from terms.matching import apply_subst, evaluate, ground_fact, mgs, multiset_match
from terms.substitution import Substitution
from terms.term import format_value

logger = logging.getLogger(__name__)


class RuleIndex:
    """Trigger symbol -> rules, hint symbol -> rules, and the ε-rules"""

    def __init__(self, rules: Iterable[ExtendedRule]):
        self.by_trigger: Dict[str, List[ExtendedRule]] = {}
        self.by_hint: Dict[str, List[ExtendedRule]] = {}
        self.epsilon: List[ExtendedRule] = []
        for rule in rules:
            if rule.trigger is not None:
                self.by_trigger.setdefault(rule.trigger.symbol, []).append(rule)
            elif rule.hints:
                for symbol in sorted(rule.hint_symbols):
                    self.by_hint.setdefault(symbol, []).append(rule)
            else:
                self.epsilon.append(rule)

    def triggered(self, symbol: str) -> List[ExtendedRule]:
        return self.by_trigger.get(symbol, [])

    def hinted(self, symbol: str) -> List[ExtendedRule]:
        return self.by_hint.get(symbol, [])

    def symbols(self) -> List[str]:
        return sorted(set(self.by_trigger) | set(self.by_hint))


@dataclass(frozen=True)
class MonitorState:
    configs: Tuple[Configuration, ...]
    rules: Tuple[ExtendedRule, ...]
    index: RuleIndex = field(compare=False)
    formats: FormatRegistry = field(compare=False)
    mode: str = MODE_MONITOR
    seen_random: FrozenSet[bytes] = frozenset()
    processed: int = 0
    max_configs: int = Config.MAX_CONFIGURATIONS
    record_trace: bool = field(default=True, compare=False)
    next_lineage: int = field(default=1, compare=False)

    def outputs(self) -> List[Tuple[GroundFact, ...]]:
        """M(rules, t): the output traces of the surviving configurations"""
        return list(dict.fromkeys(c.out_trace for c in self.configs))


@dataclass(frozen=True)
class TraceResult:
    state: MonitorState
    rejection: Optional[Rejection] = None
    # index of the rejected event, or the number of processed events
    index: int = 0

    @property
    def accepted(self) -> bool:
        return self.rejection is None

    def outputs(self) -> List[Tuple[GroundFact, ...]]:
        return self.state.outputs()

    def raise_for_rejection(self):
        if self.rejection is not None:
            raise EventRejected(self.rejection)


def _note(diagnostics: Optional[Diagnostics], kind, rule, message, lineage):
    if diagnostics is not None:
        diagnostics.add(kind, rule, message, lineage)


def initial_state(
    rules: Sequence[ExtendedRule],
    formats: Optional[FormatRegistry] = None,
    mode: str = MODE_MONITOR,
    max_configs: Optional[int] = None,
    initial_facts: Iterable[GroundFact] = (),
    record_trace: bool = True,
) -> MonitorState:
    """One configuration holding ``initial_facts``, after one ε pass"""
    rules = tuple(rules)
    state = MonitorState(
        configs=(Configuration(FactMultiset(initial_facts)),),
        rules=rules,
        index=RuleIndex(rules),
        formats=formats if formats is not None else FormatRegistry(),
        mode=mode,
        max_configs=Config.MAX_CONFIGURATIONS if max_configs is None else max_configs,
        record_trace=record_trace,
    )
    following = handle_epsilon(state, state.configs[0])
    if following:
        configs, next_lineage = _canonical(following, state.next_lineage)
        state = replace(state, configs=configs, next_lineage=next_lineage)
    logger.debug(
        "monitor initialised with %d rules (%d ε-rules) in %s mode",
        len(rules), len(state.index.epsilon), mode,
    )
    return state


def conflict_set(state: MonitorState, c: Configuration, rule: ExtendedRule) -> List[Substitution]:
    """Substitutions instantiating the premise of ``rule`` inside ``c``"""
    return multiset_match(c.state, rule.premise, state.formats)


def apply_rule(
    state: MonitorState,
    c: Configuration,
    rule: ExtendedRule,
    subst: Substitution,
    diagnostics: Optional[Diagnostics] = None,
) -> Optional[Configuration]:
    """Fire ``rule`` under ``subst``; None if an Eq constraint or a construction fails"""
    formats = state.formats
    try:
        for left, right in rule.equalities:
            a = evaluate(left, subst, formats)
            b = evaluate(right, subst, formats)
            if type(a) is not type(b) or a != b:
                _note(diagnostics, EQ_FAILED, rule.name,
                      f"Eq({left}, {right}) does not hold: {format_value(a)} != {format_value(b)}",
                      c.lineage)
                return None
        consumed = [ground_fact(f, subst, formats) for f in rule.premise if not f.persistent]
        produced = [ground_fact(f, subst, formats) for f in rule.conclusion]
        events = [ground_fact(f, subst, formats) for f in rule.events] if state.record_trace else []
    except EvaluationError as exc:
        _note(diagnostics, CONSTRUCTION_FAILED, rule.name, str(exc), c.lineage)
        return None
    try:
        updated = c.state.remove(consumed).add(produced)
    except ValueError as exc:
        _note(diagnostics, CONSTRUCTION_FAILED, rule.name, str(exc), c.lineage)
        return None
    logger.debug("applied %s with %r", rule.name, subst)
    return Configuration(updated, c.out_trace + tuple(events), c.lineage)


def _epsilon_step(state, c, diagnostics) -> Tuple[List[Configuration], bool]:
    updated = []
    failed = False
    for rule in state.index.epsilon:
        for subst in conflict_set(state, c, rule):
            d = apply_rule(state, c, rule, subst, diagnostics)
            if d is None:
                failed = True
            elif d != c:
                updated.append(d)
    return updated, failed


def handle_epsilon(
    state: MonitorState, c: Configuration, diagnostics: Optional[Diagnostics] = None
) -> List[Configuration]:
    """One pass over the ε-rules; applications that change nothing are not counted"""
    return _epsilon_step(state, c, diagnostics)[0]


def _follow_up(state, d: Configuration, rule: ExtendedRule, diagnostics) -> List[Configuration]:
    following, failed = _epsilon_step(state, d, diagnostics)
    if following:
        return following
    if failed:
        # an ε-step whose premise is present is obligatory
        _note(diagnostics, STEP_FAILED, rule.name,
              "the follow-up step after this rule fails its constraints", d.lineage)
        return []
    return [d]


def handle_triggers(
    state: MonitorState,
    c: Configuration,
    rule: ExtendedRule,
    event: ProgramEvent,
    diagnostics: Optional[Diagnostics] = None,
) -> List[Configuration]:
    updated = []
    for subst in conflict_set(state, c, rule):
        rho = mgs(event, rule.trigger, state.formats, subst)
        if rho is None:
            continue
        d = apply_rule(state, c, rule, rho, diagnostics)
        if d is not None:
            updated.extend(_follow_up(state, d, rule, diagnostics))
    return updated


def handle_hints(
    state: MonitorState,
    c: Configuration,
    rule: ExtendedRule,
    event: ProgramEvent,
    diagnostics: Optional[Diagnostics] = None,
) -> List[Configuration]:
    """Apply ``rule`` without consuming ``event``, then let a trigger rule consume it.

    Raises ``WellFormednessError`` when the event matches hints of the
    rule under more than one instantiation.
    """
    updated = []
    for subst in conflict_set(state, c, rule):
        matches: Dict[Substitution, List[str]] = {}
        for hint in rule.hints:
            rho = mgs(event, hint, state.formats, subst)
            if rho is not None:
                matches.setdefault(rho, []).append(str(hint))
        if not matches:
            continue
        if len(matches) > 1:
            raise WellFormednessError(rule.name, event, [h for hints in matches.values() for h in hints])
        d = apply_rule(state, c, rule, next(iter(matches)), diagnostics)
        if d is None:
            continue
        following = []
        for trigger_rule in state.index.triggered(event.name):
            following.extend(handle_triggers(state, d, trigger_rule, event, diagnostics))
        if not following:
            _note(diagnostics, HINT_DROPPED, rule.name,
                  f"hint matched but no rule with trigger {event.name} applies afterwards", c.lineage)
            continue
        updated.extend(following)
    return updated


def _canonical(configs: List[Configuration], next_lineage: int) -> Tuple[Tuple[Configuration, ...], int]:
    if len(configs) == 1:
        return tuple(configs), next_lineage
    unique = list(dict.fromkeys(configs))
    unique.sort(key=Configuration.sort_key)
    seen = set()
    result = []
    for c in unique:
        if c.lineage in seen:
            c = c.with_lineage(next_lineage)
            next_lineage += 1
        seen.add(c.lineage)
        result.append(c)
    return tuple(result), next_lineage


def _describe(event: ProgramEvent) -> str:
    origin = []
    if event.tid is not None:
        origin.append(f"tid={event.tid}")
    if event.ts is not None:
        origin.append(f"ts={event.ts}")
    return f"{event} [{' '.join(origin)}]" if origin else str(event)


def process_event(state: MonitorState, event: ProgramEvent) -> Union[MonitorState, Rejection]:
    index = state.processed
    seen_random = state.seen_random
    if event.name == Config.RANDOM:
        if event.ret in seen_random:
            violation = LikelyStreamViolation(index, event.ret)
            logger.critical("%s", violation)
            raise violation
        seen_random = seen_random | {event.ret}

    diagnostics = Diagnostics()
    hinted = state.index.hinted(event.name)
    triggered = state.index.triggered(event.name)
    updated: List[Configuration] = []
    for c in state.configs:
        before = len(updated)
        for rule in hinted:
            updated.extend(handle_hints(state, c, rule, event, diagnostics))
        for rule in triggered:
            updated.extend(handle_triggers(state, c, rule, event, diagnostics))
        if len(updated) == before and not any(e.lineage == c.lineage for e in diagnostics):
            _note(diagnostics, NO_RULE, None,
                  f"no rule with trigger or hint {event.name} applies", c.lineage)

    if not updated:
        rejection = Rejection(event, index, tuple(diagnostics), tuple(permissible_events(state)))
        logger.error("%s", rejection.report())
        return rejection

    configs, next_lineage = _canonical(updated, state.next_lineage)
    if len(configs) > state.max_configs:
        abort = ConfigurationLimitExceeded(len(configs), state.max_configs)
        logger.critical("%s", abort)
        raise abort
    if state.mode == MODE_REWRITE and len(configs) > 1:
        abort = NondeterministicRewriteError(event, len(configs))
        logger.critical("%s", abort)
        raise abort
    logger.info("event %d accepted: %s", index, _describe(event))
    logger.debug("%d configurations after event %d", len(configs), index)
    return replace(
        state, configs=configs, seen_random=seen_random, processed=index + 1, next_lineage=next_lineage
    )


def process_trace(state: MonitorState, events: Iterable[ProgramEvent]) -> TraceResult:
    """Fold ``process_event`` over ``events``, stopping at the first rejection"""
    current = state
    for event in events:
        result = process_event(current, event)
        if isinstance(result, Rejection):
            return TraceResult(current, result, result.index)
        current = result
    return TraceResult(current, None, current.processed)


def permissible_events(state: MonitorState) -> List[EventPattern]:
    """Trigger and hint patterns, instantiated per configuration, that some rule would accept"""
    patterns: Dict[EventPattern, EventPattern] = {}
    for c in state.configs:
        for rule in state.rules:
            if rule.is_epsilon:
                continue
            candidates = [(rule.trigger, False)] if rule.trigger is not None else [(h, True) for h in rule.hints]
            for subst in conflict_set(state, c, rule):
                for pattern, hint in candidates:
                    try:
                        args = tuple(apply_subst(a, subst, state.formats) for a in pattern.args)
                        result = None
                        if pattern.result is not None:
                            result = apply_subst(pattern.result, subst, state.formats)
                    except EvaluationError:
                        continue
                    found = EventPattern(pattern.symbol, args, result, rule.name, hint)
                    patterns.setdefault(found, found)
    return list(patterns.values())

