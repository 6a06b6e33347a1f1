"""Grammar for format string bodies, e.g. ``cat(int(l,'8'), byte(t,'1'), byte(h))``"""
from typing import Sequence

import pyparsing as pp

from errors.monitor_errors import MacroError
from formats.format_string import (
    OPERATORS,
    REST,
    ExprConst,
    ExprOp,
    ExprReverse,
    ExprVar,
    FieldType,
    FormatDef,
    FormatField,
    Length,
    strip_reverse,
)
from terms.term import pub_name_bytes

LPAR, RPAR, COMMA = map(pp.Suppress, "(),")

identifier = pp.Word(pp.alphas + "_", pp.alphanums + "_")
hex_literal = pp.Regex(r"0x(?:[0-9a-fA-F]{2})*")
hex_literal.set_parse_action(lambda t: ExprConst(bytes.fromhex(t[0][2:])))
number = pp.Word(pp.nums)
number.set_parse_action(lambda t: ExprConst(int(t[0])))
quoted = pp.QuotedString("'")
quoted.set_parse_action(lambda t: ExprConst(pub_name_bytes(t[0])))

expression = pp.Forward()
variable = identifier.copy().set_parse_action(lambda t: ExprVar(t[0]))
operator = pp.one_of(" ".join(OPERATORS)) + LPAR + expression + COMMA + expression + RPAR
operator.set_parse_action(lambda t: ExprOp(t[0], t[1], t[2]))
reverse = pp.Keyword("reverse") + LPAR + expression + RPAR
reverse.set_parse_action(lambda t: ExprReverse(t[1]))
expression <<= operator | reverse | hex_literal | number | quoted | variable


def _length(tokens):
    token = tokens[0]
    if isinstance(token, ExprConst):
        value = token.value
        if isinstance(value, bytes):
            text = value.decode("ascii", errors="replace")
            if not text.isdigit():
                raise pp.ParseFatalException("", 0, f"length '{text}' is not a number")
            value = int(text)
        return Length.const(value)
    inner, flipped = strip_reverse(token)
    if not isinstance(inner, ExprVar):
        raise pp.ParseFatalException("", 0, "a length is a number or a variable")
    return Length.var(inner.label, reverse=flipped)


length = (reverse | number | quoted | variable).set_parse_action(_length)
field_type = pp.one_of("int byte string")


def _field(tokens):
    value, flipped = strip_reverse(tokens[1])
    field_length = tokens[2] if len(tokens) > 2 else REST
    return FormatField(FieldType(tokens[0]), value, field_length, flipped)


fmt_field = (field_type + LPAR + expression + pp.Optional(COMMA + length) + RPAR)
fmt_field.set_parse_action(_field)
body = pp.Suppress(pp.Keyword("cat")) + LPAR + pp.DelimitedList(fmt_field) + RPAR | fmt_field
body.ignore(pp.c_style_comment)


def parse_format_body(text: str):
    try:
        return list(body.parse_string(text, parse_all=True))
    except (pp.ParseException, pp.ParseFatalException) as exc:
        raise MacroError(f"invalid format body '{text.strip()}': {exc.msg}") from None


def define_format(name: str, params: Sequence[str], text: str) -> FormatDef:
    """Build a format definition from a macro body"""
    return FormatDef(name, tuple(params), tuple(parse_format_body(text)))
