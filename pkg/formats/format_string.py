"""
Format strings: byte-level message layouts built from typed fields.

A definition such as ``cat(int(l,'8'), byte(t,'1'), string(m,l), byte(h))``
is a sequence of fields. Each field holds a constant or a variable and a
length that is a constant width, a reference to an earlier variable, or
(last field only) the rest of the input. Integers are big-endian unless
wrapped in ``reverse``.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from config.config import Config
from errors.monitor_errors import FormatConstructionError, FormatError, MacroError

logger = logging.getLogger(__name__)

Value = Union[bytes, int]
Bindings = Dict[str, Value]


class FieldType(Enum):
    INT = "int"
    BYTE = "byte"
    STRING = "string"


class LengthKind(Enum):
    CONST = "const"
    VAR = "var"
    REST = "rest"


@dataclass(frozen=True)
class Length:
    kind: LengthKind
    size: int = 0
    label: Optional[str] = None
    reverse: bool = False

    @classmethod
    def const(cls, size):
        return cls(LengthKind.CONST, size=size)

    @classmethod
    def var(cls, label, reverse=False):
        return cls(LengthKind.VAR, label=label, reverse=reverse)

    def __str__(self):
        if self.kind is LengthKind.CONST:
            return f"'{self.size}'"
        if self.kind is LengthKind.VAR:
            return f"reverse({self.label})" if self.reverse else self.label
        return ""


REST = Length(LengthKind.REST)


# Value expressions

class Expr:
    def labels(self) -> List[str]:
        return []


@dataclass(frozen=True)
class ExprVar(Expr):
    label: str

    def labels(self):
        return [self.label]

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class ExprConst(Expr):
    value: Value

    def __str__(self):
        if isinstance(self.value, int):
            return str(self.value)
        return "0x" + self.value.hex()


@dataclass(frozen=True)
class ExprOp(Expr):
    op: str
    left: Expr
    right: Expr

    def labels(self):
        return self.left.labels() + self.right.labels()

    def __str__(self):
        return f"{self.op}({self.left}, {self.right})"


@dataclass(frozen=True)
class ExprReverse(Expr):
    inner: Expr

    def labels(self):
        return self.inner.labels()

    def __str__(self):
        return f"reverse({self.inner})"


OPERATORS = ("add", "and", "or")


@dataclass(frozen=True)
class FormatField:
    type: FieldType
    value: Expr
    length: Length = REST
    reverse: bool = False

    @property
    def is_constant(self) -> bool:
        return isinstance(self.value, ExprConst)

    @property
    def label(self) -> Optional[str]:
        return self.value.label if isinstance(self.value, ExprVar) else None

    @property
    def is_expression(self) -> bool:
        return not isinstance(self.value, (ExprVar, ExprConst))

    def __str__(self):
        value = f"reverse({self.value})" if self.reverse else str(self.value)
        if self.length.kind is LengthKind.REST:
            return f"{self.type.value}({value})"
        return f"{self.type.value}({value}, {self.length})"


def strip_reverse(expr: Expr) -> Tuple[Expr, bool]:
    """Remove top-level ``reverse`` wrappers; nested ones cancel by parity"""
    flipped = False
    while isinstance(expr, ExprReverse):
        expr = expr.inner
        flipped = not flipped
    return expr, flipped


@dataclass(frozen=True)
class FormatDef:
    name: str
    params: Tuple[str, ...]
    fields: Tuple[FormatField, ...]
    little_endian: frozenset = field(default=frozenset(), compare=False)
    numeric: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "fields", tuple(self.fields))
        self._validate()

    def _validate(self):
        if len(set(self.params)) != len(self.params):
            raise MacroError(f"format '{self.name}' repeats a parameter")
        earlier = set()
        ref_reverse = {}
        for index, fmt_field in enumerate(self.fields):
            length = fmt_field.length
            if length.kind is LengthKind.CONST and not 0 <= length.size <= Config.MAX_FIELD_WIDTH:
                raise MacroError(
                    f"format '{self.name}': field width {length.size} exceeds {Config.MAX_FIELD_WIDTH}"
                )
            if length.kind is LengthKind.VAR:
                owner = self._owner(length.label)
                if length.label not in earlier or owner is None:
                    raise MacroError(
                        f"format '{self.name}': length '{length.label}' does not name "
                        "a variable of an earlier field"
                    )
                if ref_reverse.setdefault(length.label, length.reverse) != length.reverse:
                    raise MacroError(
                        f"format '{self.name}': length '{length.label}' is read with both byte orders"
                    )
                width = owner.length
                if width.kind is LengthKind.CONST and width.size > Config.MAX_LENGTH_FIELD_WIDTH:
                    raise MacroError(
                        f"format '{self.name}': length field '{length.label}' is "
                        f"wider than {Config.MAX_LENGTH_FIELD_WIDTH} bytes"
                    )
            if fmt_field.type is FieldType.INT and length.kind is LengthKind.REST:
                raise MacroError(f"format '{self.name}': int field {index + 1} needs a width")
            earlier.update(fmt_field.value.labels())

        numeric = set(ref_reverse)
        numeric.update(f.label for f in self.fields if f.label and f.type is FieldType.INT)
        little = set()
        for fmt_field in self.fields:
            label = fmt_field.label
            if label in numeric and fmt_field.reverse != ref_reverse.get(label, False):
                little.add(label)

        missing = [p for p in self.params if p not in earlier]
        if missing:
            raise MacroError(
                f"format '{self.name}': parameter(s) {', '.join(missing)} do not occur in the body"
            )
        for label in earlier:
            if label not in self.params and label not in ref_reverse:
                raise MacroError(f"format '{self.name}' uses undeclared variable '{label}'")
        object.__setattr__(self, "little_endian", frozenset(little))
        object.__setattr__(self, "numeric", frozenset(numeric))

    def _owner(self, label) -> Optional[FormatField]:
        for fmt_field in self.fields:
            if fmt_field.label == label:
                return fmt_field
        return None

    @property
    def parseable(self) -> bool:
        """False for construction-only definitions"""
        for index, fmt_field in enumerate(self.fields):
            if fmt_field.is_expression:
                return False
            if fmt_field.length.kind is LengthKind.REST and index != len(self.fields) - 1:
                if not (fmt_field.is_constant and isinstance(fmt_field.value.value, bytes)):
                    return False
        return True

    def __str__(self):
        body = ", ".join(str(f) for f in self.fields)
        return f"{self.name}({', '.join(self.params)}) = cat({body})"


# Construction

def _combine(op, left: Value, right: Value) -> Value:
    if isinstance(left, int) and isinstance(right, int):
        if op == "add":
            return left + right
        return left & right if op == "and" else left | right
    if isinstance(left, bytes) and isinstance(right, bytes):
        if len(left) != len(right):
            raise FormatConstructionError(
                f"{op}() needs operands of equal length, got {len(left)} and {len(right)} bytes"
            )
        a = int.from_bytes(left, "big")
        b = int.from_bytes(right, "big")
        if op == "add":
            result = (a + b) % (1 << (8 * len(left)))
        else:
            result = a & b if op == "and" else a | b
        return result.to_bytes(len(left), "big")
    raise FormatConstructionError(f"{op}() cannot combine a natural and a bitstring")


def _evaluate(expr: Expr, env: Bindings) -> Value:
    if isinstance(expr, ExprConst):
        return expr.value
    if isinstance(expr, ExprVar):
        if expr.label not in env:
            raise FormatConstructionError(f"unbound variable '{expr.label}'")
        return env[expr.label]
    if isinstance(expr, ExprOp):
        return _combine(expr.op, _evaluate(expr.left, env), _evaluate(expr.right, env))
    if isinstance(expr, ExprReverse):
        inner = _evaluate(expr.inner, env)
        if isinstance(inner, int):
            raise FormatConstructionError("reverse() inside an expression needs a bitstring")
        return inner[::-1]
    raise FormatConstructionError(f"unsupported expression {expr!r}")


def _field_width(fmt_field: FormatField, env: Bindings) -> Optional[int]:
    length = fmt_field.length
    if length.kind is LengthKind.CONST:
        return length.size
    if length.kind is LengthKind.VAR:
        width = env[length.label]
        if not isinstance(width, int):
            raise FormatConstructionError(f"length '{length.label}' is not a natural")
        return width
    return None


def _is_numeric(definition: FormatDef, fmt_field: FormatField) -> bool:
    if fmt_field.type is FieldType.INT:
        return True
    return fmt_field.label is not None and fmt_field.label in definition.numeric


def _is_little(definition: FormatDef, fmt_field: FormatField) -> bool:
    if fmt_field.label is not None:
        return fmt_field.label in definition.little_endian
    return fmt_field.reverse


def _encode_field(definition: FormatDef, fmt_field: FormatField, env: Bindings) -> bytes:
    value = _evaluate(fmt_field.value, env)
    width = _field_width(fmt_field, env)
    little = _is_little(definition, fmt_field)
    if isinstance(value, int):
        if width is None:
            width = max(1, (value.bit_length() + 7) // 8)
        try:
            return value.to_bytes(width, "little" if little else "big")
        except OverflowError:
            raise FormatConstructionError(
                f"format '{definition.name}': value {value} does not fit in {width} bytes"
            ) from None
    if fmt_field.reverse:
        value = value[::-1]
    if width is not None and len(value) != width:
        raise FormatConstructionError(
            f"format '{definition.name}': field {fmt_field} expects {width} bytes, "
            f"got {len(value)}"
        )
    return value


def fs_construct(definition: FormatDef, bindings: Bindings) -> bytes:
    """Build the bitstring for ``definition`` from parameter bindings.

    Length variables that are not bound are computed from the byte length
    of the field they measure.
    """
    missing = [p for p in definition.params if p not in bindings]
    if missing:
        raise FormatConstructionError(
            f"format '{definition.name}': unbound variable(s) {', '.join(missing)}"
        )
    env: Bindings = dict(bindings)
    for fmt_field in definition.fields:
        length = fmt_field.length
        if length.kind is not LengthKind.VAR:
            continue
        payload = _evaluate(fmt_field.value, env)
        if isinstance(payload, int):
            raise FormatConstructionError(
                f"format '{definition.name}': length '{length.label}' measures a natural"
            )
        if length.label not in env:
            env[length.label] = len(payload)
        elif env[length.label] != len(payload):
            raise FormatConstructionError(
                f"format '{definition.name}': length '{length.label}' is {env[length.label]} "
                f"but the payload has {len(payload)} bytes"
            )
    data = b"".join(_encode_field(definition, f, env) for f in definition.fields)
    if len(data) > Config.MAX_FIELD_WIDTH:
        raise FormatConstructionError(f"format '{definition.name}': message too long")
    return data


# Parsing

def _decode(definition: FormatDef, fmt_field: FormatField, chunk: bytes) -> Value:
    little = _is_little(definition, fmt_field)
    if _is_numeric(definition, fmt_field):
        return int.from_bytes(chunk, "little" if little else "big")
    return chunk[::-1] if fmt_field.reverse else chunk


def fs_match(definition: FormatDef, data: bytes) -> Optional[Bindings]:
    """Parse ``data`` left to right in a single pass.

    Returns the bindings of every variable of the definition, parameters
    and internal length variables alike, or ``None`` on mismatch.
    """
    if not definition.parseable:
        raise FormatError(f"format '{definition.name}' is construction-only and cannot be parsed")
    env: Bindings = {}
    position = 0
    last = len(definition.fields) - 1
    for index, fmt_field in enumerate(definition.fields):
        width = _field_width(fmt_field, env)
        if width is None:
            if fmt_field.is_constant and isinstance(fmt_field.value.value, bytes):
                width = len(fmt_field.value.value)
            elif index == last:
                width = len(data) - position
        if position + width > len(data):
            return None
        chunk = data[position:position + width]
        position += width
        if fmt_field.is_constant:
            expected = _encode_field(definition, fmt_field, env)
            if chunk != expected:
                return None
            continue
        value = _decode(definition, fmt_field, chunk)
        label = fmt_field.label
        if label in env and env[label] != value:
            return None
        env[label] = value
    if position != len(data):
        return None
    return env


def parameter_bindings(definition: FormatDef, bindings: Bindings) -> Bindings:
    return {p: bindings[p] for p in definition.params}
