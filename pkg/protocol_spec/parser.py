"""
Specification file parser.

The preprocessed source is split into top-level blocks, each block is
parsed with its own grammar, and function applications are resolved
against the declared functions, builtins and format macros.
"""
import logging
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import pyparsing as pp

from config.config import Config
from errors.monitor_errors import (
    ArityError,
    DuplicateSymbolError,
    MacroError,
    SpecSyntaxError,
    UndeclaredSymbolError,
)
from formats.body import define_format
from formats.registry import FormatRegistry
from protocol_spec import grammar
from protocol_spec.grammar import MacroName, RawApp, RawFact
from protocol_spec.model import MacroDef, RawBlock, RuleAst, SpecFile
from protocol_spec.preprocess import active_flags, preprocess, strip_comments
from terms.facts import Fact
from terms.term import App, FormatApp, FunctionSymbol, SymbolKind, Term

logger = logging.getLogger(__name__)

BUILTIN_FUNCTIONS = {
    "hashing": (("h", 1),),
    "symmetric-encryption": (("senc", 2), ("sdec", 2)),
    "asymmetric-encryption": (("aenc", 2), ("adec", 2), ("pk", 1)),
    "signing": (("sign", 2), ("verify", 3), ("pk", 1), ("true", 0)),
    "revealing-signing": (
        ("revealSign", 2), ("revealVerify", 3), ("getMessage", 1), ("pk", 1), ("true", 0),
    ),
    "natural-numbers": (),
}
PAIR_FUNCTIONS = (("pair", 2), ("fst", 1), ("snd", 1))
RESERVED_SYMBOLS = ("receive", "random", "send")

_BLOCK_KEYWORDS = {
    "theory": r"theory",
    "begin": r"begin",
    "end": r"end",
    "builtins": r"builtins\s*:",
    "functions": r"functions\s*:",
    "equations": r"equations\s*:",
    "macros": r"macros\s*:",
    "mode": r"mode\s*:",
    "rule": r"rule",
    "lemma": r"lemma",
    "restriction": r"restriction",
    "axiom": r"axiom",
    "heuristic": r"heuristic\s*:",
    "tactic": r"tactic\s*:",
    "predicates": r"predicates\s*:",
    "options": r"options\s*:",
    "export": r"export",
}
_BLOCK_START = re.compile(
    r"^[ \t]*(?:" + "|".join(f"(?P<{k}>{v})" for k, v in _BLOCK_KEYWORDS.items())
    + r")(?=[\s:\[]|$)"
)
_INTERPRETED = {"theory", "begin", "end", "builtins", "functions", "equations", "macros", "mode", "rule"}


@dataclass
class Block:
    keyword: str
    text: str
    line: int


def split_blocks(source: str) -> List[Block]:
    """Cut the source at lines that open a top-level block"""
    blocks: List[Block] = []
    current: Optional[Block] = None
    lines = source.split("\n")
    for number, line in enumerate(lines, start=1):
        match = _BLOCK_START.match(line)
        if match:
            current = Block(match.lastgroup, line, number)
            blocks.append(current)
        elif current is not None:
            current.text += "\n" + line
        elif line.strip():
            column = len(line) - len(line.lstrip()) + 1
            raise SpecSyntaxError(f"unexpected text '{line.strip()}' outside of any block", number, column)
    return blocks


def _parse_block(element: pp.ParserElement, block: Block) -> pp.ParseResults:
    try:
        return element.parse_string(block.text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise SpecSyntaxError(
            f"invalid {block.keyword} block: {exc.msg}", block.line + exc.lineno - 1, exc.col
        ) from None


class _Resolver:
    """Turns raw applications into function or format applications"""

    def __init__(self, spec: SpecFile, builtin: Dict[str, FunctionSymbol]):
        self.spec = spec
        self.builtin = builtin
        self.fact_arity: Dict[str, Tuple[int, int]] = {}

    def term(self, term: Term, offset: int) -> Term:
        if isinstance(term, RawApp):
            args = tuple(self.term(a, offset) for a in term.args)
            line = term.line + offset
            if term.name in self.spec.formats:
                params = self.spec.formats.get(term.name).params
                if len(params) != len(args):
                    raise ArityError(
                        f"format '{term.name}' expects {len(params)} arguments, got {len(args)}",
                        line, term.column,
                    )
                return FormatApp(term.name, args)
            symbol = self.spec.functions.get(term.name) or self.builtin.get(term.name)
            if symbol is None:
                raise UndeclaredSymbolError(
                    f"{term.name}/{len(args)}",
                    f"undeclared function symbol '{term.name}/{len(args)}'",
                    line, term.column,
                )
            if symbol.arity != len(args):
                raise ArityError(
                    f"function '{term.name}' expects {symbol.arity} arguments, got {len(args)}",
                    line, term.column,
                )
            return App(symbol, args)
        if isinstance(term, App):
            return App(term.symbol, tuple(self.term(a, offset) for a in term.args))
        return term

    def fact(self, raw: RawFact, offset: int) -> Fact:
        line = raw.line + offset
        arity = len(raw.args)
        known = self.fact_arity.setdefault(raw.name, (arity, line))
        if known[0] != arity:
            raise ArityError(
                f"fact '{raw.name}' is used with {arity} arguments here but with "
                f"{known[0]} on line {known[1]}",
                line, raw.column,
            )
        return Fact(raw.name, tuple(self.term(a, offset) for a in raw.args), raw.persistent)


def _builtin_table(builtins: Iterable[str]) -> Dict[str, FunctionSymbol]:
    table = {name: FunctionSymbol(name, arity) for name, arity in PAIR_FUNCTIONS}
    for builtin in builtins:
        if builtin not in BUILTIN_FUNCTIONS:
            logger.warning("builtin '%s' is not supported by the monitor and is ignored", builtin)
            continue
        for name, arity in BUILTIN_FUNCTIONS[builtin]:
            table.setdefault(name, FunctionSymbol(name, arity))
    return table


def _declare_functions(spec: SpecFile, block: Block):
    for decl in _parse_block(grammar.functions_block, block)[0]:
        name, arity = decl[0], int(decl[1])
        if name in RESERVED_SYMBOLS:
            raise DuplicateSymbolError(
                f"'{name}' is reserved for the receive/random/send events", block.line
            )
        existing = spec.functions.get(name)
        if existing is not None:
            if existing.arity != arity:
                raise ArityError(
                    f"function '{name}' declared with arities {existing.arity} and {arity}", block.line
                )
            raise DuplicateSymbolError(f"function '{name}' is declared twice", block.line)
        spec.functions[name] = FunctionSymbol(name, arity, SymbolKind.USER)


def _define_macros(spec: SpecFile, block: Block):
    for entry in _parse_block(grammar.macros_block, block)[0]:
        located: MacroName = entry[0]
        params = tuple(entry[1])
        body = entry[2]
        line = block.line + located.line - 1
        try:
            definition = define_format(located.name, params, body)
        except MacroError as exc:
            raise MacroError(str(exc), line, located.column) from None
        if located.name in spec.formats:
            raise DuplicateSymbolError(f"macro '{located.name}' is defined twice", line, located.column)
        spec.formats.add(definition)
        spec.macros.append(MacroDef(located.name, params, body))


def parse_spec(source: str, flags: Optional[Iterable[str]] = None, strict_formats: Optional[bool] = None) -> SpecFile:
    """Parse a specification file into a ``SpecFile``"""
    flags = active_flags() if flags is None else set(flags) | set(Config.DEFAULT_FLAGS)
    text = strip_comments(preprocess(source, flags))
    blocks = split_blocks(text)
    spec = SpecFile(flags=frozenset(flags), formats=FormatRegistry(strict=strict_formats))

    # declarations first so rules may precede them in the file
    for block in blocks:
        if block.keyword == "builtins":
            spec.builtins.extend(_parse_block(grammar.builtins_block, block)[0])
        elif block.keyword == "functions":
            _declare_functions(spec, block)
        elif block.keyword == "macros":
            _define_macros(spec, block)

    for name, definition in ((d.name, d) for d in spec.formats):
        declared = spec.functions.get(name)
        if declared is not None and declared.arity != len(definition.params):
            raise ArityError(
                f"format '{name}' has {len(definition.params)} parameters but is declared as "
                f"{name}/{declared.arity}"
            )

    resolver = _Resolver(spec, _builtin_table(spec.builtins))
    rule_names = set()
    for block in blocks:
        offset = block.line - 1
        if block.keyword == "theory":
            spec.name = _parse_block(grammar.theory_block, block)[0]
        elif block.keyword in ("begin", "end"):
            if block.text.strip() not in ("begin", "end"):
                raise SpecSyntaxError(f"unexpected text after '{block.keyword}'", block.line)
        elif block.keyword == "mode":
            spec.mode = _parse_block(grammar.mode_block, block)[0]
        elif block.keyword == "equations":
            for left, right in _parse_block(grammar.equations_block, block)[0]:
                spec.equations.append((resolver.term(left, offset), resolver.term(right, offset)))
        elif block.keyword == "rule":
            rule = _build_rule(_parse_block(grammar.rule_block, block), resolver, block)
            if rule.name in rule_names:
                raise DuplicateSymbolError(f"rule '{rule.name}' is defined twice", block.line)
            rule_names.add(rule.name)
            spec.rules.append(rule)
        elif block.keyword not in _INTERPRETED:
            logger.warning("line %d: skipping %s block, the monitor does not use it", block.line, block.keyword)
            spec.extra_blocks.append(RawBlock(block.keyword, block.text.strip(), block.line))

    logger.info(
        "parsed %s: %d rules, %d formats, %d functions (mode %s)",
        spec.name or "specification", len(spec.rules), len(spec.formats), len(spec.functions), spec.mode,
    )
    return spec


def _build_rule(tokens: pp.ParseResults, resolver: _Resolver, block: Block) -> RuleAst:
    offset = block.line - 1
    name, attributes, lets, premise, actions, conclusion = tokens
    role = None
    others = []
    for key, value in attributes:
        if key == "role":
            role = value
        else:
            others.append((key, value))
    return RuleAst(
        name=name,
        role=role,
        lets=tuple((var.label, resolver.term(value, offset)) for var, value in lets),
        premise=tuple(resolver.fact(f, offset) for f in premise),
        actions=tuple(resolver.fact(f, offset) for f in actions),
        conclusion=tuple(resolver.fact(f, offset) for f in conclusion),
        attributes=tuple(others),
        line=block.line,
    )


def load_spec(path: str, flags: Optional[Iterable[str]] = None, strict_formats: Optional[bool] = None) -> SpecFile:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_spec(handle.read(), flags, strict_formats)
