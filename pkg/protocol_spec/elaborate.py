"""
Elaboration of parsed rules into extended rules.

Expands ``let`` bindings, sorts actions into trigger, hints, equalities
and events, enforces the extended-rule shape for the rules that will be
monitored and reports everything else as lints.
"""
import logging
from typing import Dict, List, Optional, Sequence, Set, Tuple

from errors.monitor_errors import RuleShapeError, UnknownRoleError
from formats.registry import lint_disjoint
from protocol_spec.model import (
    EMIT,
    EQ,
    FR,
    HINT,
    IN,
    MODE_REWRITE,
    OUT,
    ST_PREFIX,
    TRIG,
    Elaboration,
    ExtendedRule,
    RuleAst,
    SpecFile,
    ValidationReport,
)
from terms.facts import Fact, Trigger
from terms.term import (
    App,
    FormatApp,
    PubName,
    Sort,
    SymbolKind,
    Term,
    Variable,
    contains_user_app,
    iter_subterms,
    replace_subterms,
    variables,
)

logger = logging.getLogger(__name__)

ENVIRONMENT_FACTS = (IN, OUT, FR)
WILDCARD = "_"


def select_role(spec: SpecFile, role: Optional[str]) -> List[RuleAst]:
    """Rules of ``role`` plus the role-agnostic rules"""
    if spec.mode == MODE_REWRITE or role is None:
        return list(spec.rules)
    roles = spec.roles()
    if not roles:
        logger.warning("specification has no role attributes; no rules selected for role %s", role)
        return []
    if role not in roles:
        raise UnknownRoleError(role, roles)
    return [r for r in spec.rules if r.role in (role, None)]


# let expansion

def _expand(term: Term, definitions: Dict[str, Term]) -> Term:
    if isinstance(term, Variable) and term.label in definitions:
        return definitions[term.label]
    if isinstance(term, App):
        return App(term.symbol, tuple(_expand(a, definitions) for a in term.args))
    if isinstance(term, FormatApp):
        return FormatApp(term.format, tuple(_expand(a, definitions) for a in term.args))
    return term


def expand_lets(rule: RuleAst) -> Dict[str, Term]:
    raw = dict(rule.lets)
    resolved: Dict[str, Term] = {}
    visiting: Set[str] = set()

    def resolve(label: str) -> Term:
        if label in resolved:
            return resolved[label]
        if label in visiting:
            raise RuleShapeError(rule.name, f"let binding '{label}' refers to itself")
        visiting.add(label)
        value = raw[label]
        for sub in iter_subterms(value):
            if isinstance(sub, Variable) and sub.label in raw:
                resolve(sub.label)
        resolved[label] = _expand(value, resolved)
        visiting.discard(label)
        return resolved[label]

    for label in raw:
        resolve(label)
    return resolved


def _expand_fact(fact: Fact, definitions: Dict[str, Term]) -> Fact:
    return Fact(fact.symbol, tuple(_expand(a, definitions) for a in fact.args), fact.persistent)


# action classification

def _symbol_name(rule: RuleAst, action: Fact) -> str:
    name = action.args[0]
    if not isinstance(name, PubName):
        raise RuleShapeError(rule.name, f"{action.symbol} needs a quoted function name, got {name}")
    return name.value.decode("ascii")


def _argument_terms(rule: RuleAst, action: Fact) -> Tuple[Term, ...]:
    args = action.args[1]
    if isinstance(args, App) and args.symbol.kind is SymbolKind.TUPLE:
        return args.args
    return (args,)


def _trigger(rule: RuleAst, action: Fact) -> Trigger:
    if len(action.args) != 3:
        raise RuleShapeError(rule.name, f"{action.symbol} takes a name, an argument tuple and a result")
    result = action.args[2]
    if action.symbol == HINT and isinstance(result, Variable) and result.label == WILDCARD:
        result = None
    return Trigger(_symbol_name(rule, action), _argument_terms(rule, action), result)


def _emit(rule: RuleAst, action: Fact) -> Fact:
    if len(action.args) != 3:
        raise RuleShapeError(rule.name, "Emit takes a name, an argument tuple and a result")
    name = PubName(_symbol_name(rule, action).encode("ascii"))
    return Fact(EMIT, (name,) + _argument_terms(rule, action) + (action.args[2],))


def classify(rule: RuleAst) -> ExtendedRule:
    definitions = expand_lets(rule)
    premise = tuple(_expand_fact(f, definitions) for f in rule.premise)
    conclusion = tuple(_expand_fact(f, definitions) for f in rule.conclusion)
    triggers, hints, equalities, events = [], [], [], []
    for action in (_expand_fact(a, definitions) for a in rule.actions):
        if action.symbol == TRIG:
            triggers.append(_trigger(rule, action))
        elif action.symbol == HINT:
            hints.append(_trigger(rule, action))
        elif action.symbol == EQ:
            if len(action.args) != 2:
                raise RuleShapeError(rule.name, "Eq takes exactly two terms")
            equalities.append((action.args[0], action.args[1]))
        elif action.symbol == EMIT:
            events.append(_emit(rule, action))
        else:
            events.append(action)
    if len(triggers) > 1:
        raise RuleShapeError(rule.name, f"has {len(triggers)} triggers, at most one is allowed")
    return ExtendedRule(
        name=rule.name,
        premise=premise,
        conclusion=conclusion,
        trigger=triggers[0] if triggers else None,
        hints=tuple(hints),
        equalities=tuple(equalities),
        events=tuple(events),
        role=rule.role,
        origin=rule.name,
    )


def shape_violations(rule: ExtendedRule) -> List[str]:
    problems = []
    if rule.trigger is not None and rule.hints:
        problems.append("carries both a trigger and hints")
    for fact in rule.premise:
        if any(contains_user_app(a) for a in fact.args):
            problems.append(f"premise fact {fact} contains a function application")
    patterns = ([rule.trigger] if rule.trigger else []) + list(rule.hints)
    for pattern in patterns:
        terms = list(pattern.args) + ([pattern.result] if pattern.result is not None else [])
        if any(contains_user_app(t) for t in terms):
            problems.append(f"trigger pattern {pattern.symbol} contains a function application")
    return problems


# lints

def _role_state(rules: Sequence[ExtendedRule], setup_facts: Set[str]) -> Dict[str, Set[str]]:
    state: Dict[str, Set[str]] = {}
    for rule in rules:
        if rule.role is None:
            continue
        symbols = state.setdefault(rule.role, set())
        for fact in rule.premise + rule.conclusion:
            if fact.symbol not in ENVIRONMENT_FACTS and fact.symbol not in setup_facts:
                symbols.add(fact.symbol)
    return state


def _is_setup_rule(rule: ExtendedRule) -> bool:
    return rule.role is None and any(f.symbol.startswith("Setup") for f in rule.conclusion)


def _lint_roles(rules: Sequence[ExtendedRule], report: ValidationReport):
    setup_facts = {
        f.symbol for r in rules if r.role is None for f in r.conclusion if f.persistent
    }
    state = _role_state(rules, setup_facts)
    for rule in rules:
        if _is_setup_rule(rule):
            extra = [f for f in rule.conclusion if not f.symbol.startswith("Setup")]
            if extra or rule.events or rule.equalities or rule.trigger or rule.hints:
                report.add(rule.name, "setup-shape",
                           "a Setup rule must produce only the Setup fact and carry no label")
        if rule.role is None:
            continue
        own = state[rule.role]
        foreign = set().union(*(s for r, s in state.items() if r != rule.role)) - own
        for fact in rule.premise:
            if fact.symbol == OUT or fact.symbol in foreign:
                report.add(rule.name, "role-foreign-fact",
                           f"premise uses {fact.symbol}, which is not a state or input fact of role {rule.role}")
        for fact in rule.conclusion:
            if fact.symbol in (IN, FR) or fact.symbol in setup_facts or fact.symbol in foreign:
                report.add(rule.name, "role-foreign-output",
                           f"conclusion produces {fact.symbol}, which is neither a state fact of "
                           f"role {rule.role} nor Out")
        produced = [f for f in rule.conclusion if f.symbol in own]
        if not produced:
            report.add(rule.name, "role-no-state", "conclusion contains no state fact")
        consumed = [f for f in rule.premise if f.symbol in own]
        thread_ids = {f.args[0] for f in consumed if f.args}
        for fact in produced:
            first = fact.args[0] if fact.args else None
            if not (isinstance(first, Variable) and first.sort is Sort.FRESH):
                report.add(rule.name, "role-thread-id",
                           f"first argument of state fact {fact.symbol} is not a fresh variable")
            elif thread_ids and first not in thread_ids:
                report.add(rule.name, "role-thread-id",
                           f"state fact {fact.symbol} does not keep the thread id of the premise")


def _canonical_pattern(pattern: Trigger) -> str:
    renaming = {var: Variable(f"v{i}") for i, var in enumerate(variables(*pattern.args))}
    args = ", ".join(str(replace_subterms(a, renaming)) for a in pattern.args)
    return f"{pattern.symbol}({args})"


def _lint_hints(rules: Sequence[ExtendedRule], report: ValidationReport):
    seen: Dict[str, str] = {}
    for rule in rules:
        for hint in rule.hints:
            key = _canonical_pattern(hint)
            other = seen.setdefault(key, rule.name)
            if other != rule.name:
                report.add(rule.name, "hints-not-exclusive",
                           f"hint {key} is also a hint of rule {other}")


def elaborate(spec: SpecFile, role: Optional[str] = None) -> Elaboration:
    """Classify and check the rules of ``role`` (all rules when None)"""
    report = ValidationReport()
    selected = {r.name for r in select_role(spec, role)}
    rules = []
    classified = []
    for ast in spec.rules:
        try:
            rule = classify(ast)
        except RuleShapeError as exc:
            if ast.name in selected:
                raise
            report.add(ast.name, "emsr-shape", str(exc))
            continue
        problems = shape_violations(rule)
        if problems and ast.name in selected:
            raise RuleShapeError(rule.name, "; ".join(problems))
        for problem in problems:
            report.add(rule.name, "emsr-shape", problem)
        for fact in rule.premise + rule.conclusion:
            if fact.symbol.startswith(ST_PREFIX):
                report.add(rule.name, "reserved-fact",
                           f"fact {fact.symbol} uses the prefix reserved for decomposition")
        if spec.mode == MODE_REWRITE and rule.hints:
            report.add(rule.name, "rewrite-hints", "hints have no effect in a rewrite layer")
        classified.append(rule)
        if ast.name in selected:
            rules.append(rule)
    if spec.mode != MODE_REWRITE:
        _lint_roles(classified, report)
    _lint_hints(rules, report)
    for warning in lint_disjoint(spec.formats):
        report.add(None, "formats-not-disjoint", warning)
    for lint in report:
        logger.warning("%s", lint)
    return Elaboration(tuple(rules), report)
