"""
pyparsing grammar of the specification dialect.

Function applications are produced as ``RawApp`` nodes carrying their
source position; the parser resolves them against the declared
functions and formats once the whole file has been read.
"""
from dataclasses import dataclass, field
from typing import Tuple

import pyparsing as pp

from terms.term import (
    App,
    BitLit,
    FreshMark,
    NatLit,
    PubName,
    Sort,
    Term,
    Variable,
    pub_name_bytes,
    tuple_symbol,
)

pp.ParserElement.enable_packrat()

_SORTS = {"~": Sort.FRESH, "$": Sort.PUB, "%": Sort.NAT}


@dataclass(frozen=True)
class RawApp(Term):
    name: str
    args: Tuple[Term, ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    def children(self):
        return self.args


@dataclass(frozen=True)
class RawFact:
    name: str
    args: Tuple[Term, ...]
    persistent: bool
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


LPAR, RPAR, LBRACK, RBRACK, COMMA, EQUALS, COLON, SLASH = map(pp.Suppress, "()[],=:/")

identifier = pp.Word(pp.alphas + "_", pp.alphanums + "_")


def _variable(tokens):
    text = tokens[0]
    if text[0] in _SORTS:
        return Variable(text[1:], _SORTS[text[0]])
    return Variable(text, Sort.MSG)


def _raw_app(source, location, tokens):
    return RawApp(tokens[0], tuple(tokens[1]), pp.lineno(location, source), pp.col(location, source))


def _raw_fact(source, location, tokens):
    persistent = tokens[0] == "!"
    rest = tokens[1:] if persistent else tokens
    return RawFact(rest[0], tuple(rest[1]), persistent,
                   pp.lineno(location, source), pp.col(location, source))


term = pp.Forward()
term_list = pp.Group(pp.Optional(pp.DelimitedList(term)))

hex_literal = pp.Regex(r"0x(?:[0-9a-fA-F]{2})*(?![0-9A-Za-z_])")
hex_literal.set_parse_action(lambda t: BitLit(bytes.fromhex(t[0][2:])))
fresh_literal = pp.Regex(r"~'[^'\n]*'")
fresh_literal.set_parse_action(lambda t: FreshMark(t[0][2:-1]))
pub_literal = pp.Regex(r"'[^'\n]*'")
pub_literal.set_parse_action(lambda t: PubName(pub_name_bytes(t[0][1:-1])))
nat_literal = pp.Regex(r"%\d+|\d+(?![0-9A-Za-z_])")
nat_literal.set_parse_action(lambda t: NatLit(int(t[0].lstrip("%"))))
variable = pp.Regex(r"[~$%]?[A-Za-z_][A-Za-z0-9_]*")
variable.set_parse_action(_variable)
application = identifier + LPAR + term_list + RPAR
application.set_parse_action(_raw_app)
tuple_term = pp.Suppress("<") + term_list + pp.Suppress(">")
tuple_term.set_parse_action(lambda t: App(tuple_symbol(len(t[0])), tuple(t[0])))

term <<= tuple_term | fresh_literal | pub_literal | hex_literal | nat_literal | application | variable

fact = pp.Optional(pp.Literal("!")) + identifier + LPAR + term_list + RPAR
fact.set_parse_action(_raw_fact)
fact_list = pp.Group(pp.Optional(pp.DelimitedList(fact)))

# rule NAME [role=Server]: let x = t ... in [premise] --[actions]-> [conclusion]
attribute_value = identifier | pp.QuotedString("'") | pp.QuotedString('"')
attribute = pp.Group(identifier + EQUALS + attribute_value)
attributes = pp.Group(pp.Optional(LBRACK + pp.DelimitedList(attribute) + RBRACK))
let_binding = pp.Group(variable + EQUALS + term)
lets = pp.Group(pp.Optional(
    pp.Suppress(pp.Keyword("let")) + pp.OneOrMore(let_binding) + pp.Suppress(pp.Keyword("in"))
))
arrow = (
    pp.Suppress("-->") + pp.Group(pp.Empty())
    | pp.Suppress("--[") + fact_list + pp.Suppress("]->")
)
rule_block = (
    pp.Suppress(pp.Keyword("rule")) + identifier + attributes + COLON + lets
    + LBRACK + fact_list + RBRACK + arrow + LBRACK + fact_list + RBRACK
)

# functions: hmac/2, payload/3 [private]
function_decl = pp.Group(
    identifier + SLASH + pp.Word(pp.nums)
    + pp.Optional(LBRACK + pp.DelimitedList(identifier) + RBRACK).suppress()
)
functions_block = (
    pp.Suppress(pp.Keyword("functions")) + COLON + pp.Group(pp.Optional(pp.DelimitedList(function_decl)))
)

equation = pp.Group(term + EQUALS + term)
equations_block = (
    pp.Suppress(pp.Keyword("equations")) + COLON + pp.Group(pp.Optional(pp.DelimitedList(equation)))
)

builtin_name = pp.Word(pp.alphas, pp.alphanums + "-_")
builtins_block = (
    pp.Suppress(pp.Keyword("builtins")) + COLON + pp.Group(pp.Optional(pp.DelimitedList(builtin_name)))
)


@dataclass(frozen=True)
class MacroName:
    name: str
    line: int
    column: int


macro_name = identifier.copy().set_parse_action(
    lambda source, location, tokens: MacroName(tokens[0], pp.lineno(location, source), pp.col(location, source))
)
macro_body = pp.QuotedString('"') | pp.original_text_for(identifier + pp.nested_expr("(", ")"))
macro = pp.Group(
    macro_name + LPAR + pp.Group(pp.Optional(pp.DelimitedList(identifier))) + RPAR
    + EQUALS + macro_body
)
macros_block = (
    pp.Suppress(pp.Keyword("macros")) + COLON + pp.Group(pp.Optional(pp.DelimitedList(macro)))
)

mode_block = pp.Suppress(pp.Keyword("mode")) + COLON + pp.one_of("monitor rewrite", as_keyword=True)

theory_block = (
    pp.Suppress(pp.Keyword("theory")) + identifier + pp.Optional(pp.Keyword("begin")).suppress()
)
