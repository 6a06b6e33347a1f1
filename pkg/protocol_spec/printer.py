"""Print specifications and rule sets back in the specification syntax"""
from typing import Iterable, List

from protocol_spec.model import (
    EMIT,
    EQ,
    HINT,
    MODE_MONITOR,
    TRIG,
    ExtendedRule,
    RuleAst,
    RuleKind,
    SpecFile,
)
from terms.facts import Fact, Trigger
from terms.term import PubName


def _facts(facts: Iterable) -> str:
    return ", ".join(str(f) for f in facts)


def _arrow(actions: List[str]) -> str:
    if not actions:
        return "-->"
    return f"--[ {', '.join(actions)} ]->"


def _attributes(pairs) -> str:
    if not pairs:
        return ""
    return " [" + ", ".join(f"{k}={v}" for k, v in pairs) + "]"


def print_rule(rule: RuleAst) -> str:
    attributes = ([("role", rule.role)] if rule.role else []) + list(rule.attributes)
    lines = [f"rule {rule.name}{_attributes(attributes)}:"]
    if rule.lets:
        first, *rest = rule.lets
        lines.append(f"  let {first[0]} = {first[1]}")
        lines.extend(f"      {label} = {value}" for label, value in rest)
        lines.append("  in")
    actions = [str(a) for a in rule.actions]
    lines.append(f"  [ {_facts(rule.premise)} ] {_arrow(actions)} [ {_facts(rule.conclusion)} ]")
    return "\n".join(lines)


def _action(name: str, trigger: Trigger) -> str:
    args = ", ".join(str(a) for a in trigger.args)
    result = "_" if trigger.result is None else str(trigger.result)
    return f"{name}({PubName(trigger.symbol.encode('ascii'))}, <{args}>, {result})"


def _event(fact: Fact) -> str:
    if fact.symbol != EMIT:
        return str(fact)
    name, *args, result = fact.args
    return f"{EMIT}({name}, <{', '.join(str(a) for a in args)}>, {result})"


def print_extended_rule(rule: ExtendedRule) -> str:
    actions = []
    if rule.trigger is not None:
        actions.append(_action(TRIG, rule.trigger))
    actions.extend(_action(HINT, h) for h in rule.hints)
    actions.extend(f"{EQ}({a}, {b})" for a, b in rule.equalities)
    actions.extend(_event(e) for e in rule.events)
    attributes = []
    if rule.role:
        attributes.append(("role", rule.role))
    if rule.kind is not RuleKind.PLAIN:
        attributes.append(("kind", rule.kind.value))
    if rule.origin and rule.origin != rule.name:
        attributes.append(("origin", rule.origin))
    return (
        f"rule {rule.name}{_attributes(attributes)}:\n"
        f"  [ {_facts(rule.premise)} ] {_arrow(actions)} [ {_facts(rule.conclusion)} ]"
    )


def print_rules(rules: Iterable[ExtendedRule]) -> str:
    return "\n\n".join(print_extended_rule(r) for r in rules) + "\n"


def print_spec(spec: SpecFile) -> str:
    sections = []
    if spec.name:
        sections.append(f"theory {spec.name}\nbegin")
    if spec.builtins:
        sections.append("builtins: " + ", ".join(spec.builtins))
    if spec.functions:
        sections.append("functions: " + ", ".join(str(s) for s in spec.functions.values()))
    if spec.equations:
        body = ",\n  ".join(f"{a} = {b}" for a, b in spec.equations)
        sections.append(f"equations:\n  {body}")
    if len(spec.formats):
        body = ",\n  ".join(str(d) for d in spec.formats)
        sections.append(f"macros:\n  {body}")
    if spec.mode != MODE_MONITOR:
        sections.append(f"mode: {spec.mode}")
    sections.extend(print_rule(r) for r in spec.rules)
    sections.extend(block.text for block in spec.extra_blocks)
    if spec.name:
        sections.append("end")
    return "\n\n".join(sections) + "\n"
