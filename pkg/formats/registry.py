"""Registry of format definitions and the disjointness checks over it"""
import logging
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from config.config import Config
from errors.monitor_errors import DuplicateSymbolError, FormatDisjointnessError
from formats.format_string import Bindings, FormatDef, LengthKind, fs_match

logger = logging.getLogger(__name__)


class FormatRegistry:
    """Read-only map from format name to definition once loaded"""

    def __init__(self, definitions: Iterable[FormatDef] = (), strict: Optional[bool] = None):
        self._defs: Dict[str, FormatDef] = {}
        self.strict = Config.ENFORCE_FORMAT_DISJOINTNESS if strict is None else strict
        for definition in definitions:
            self.add(definition)

    def add(self, definition: FormatDef):
        if definition.name in self._defs:
            raise DuplicateSymbolError(f"format '{definition.name}' is defined twice")
        self._defs[definition.name] = definition

    def get(self, name: str) -> FormatDef:
        return self._defs[name]

    def __contains__(self, name) -> bool:
        return name in self._defs

    def __iter__(self) -> Iterator[FormatDef]:
        return iter(self._defs.values())

    def __len__(self) -> int:
        return len(self._defs)

    def __eq__(self, other):
        if not isinstance(other, FormatRegistry):
            return NotImplemented
        return list(self._defs.values()) == list(other._defs.values())

    def names(self) -> List[str]:
        return list(self._defs)

    def parseable(self) -> List[FormatDef]:
        return [d for d in self._defs.values() if d.parseable]

    def match(self, name: str, data: bytes) -> Optional[Bindings]:
        """Parse ``data`` as format ``name``.

        In strict mode every parseable format is tried so that an input
        accepted by two formats raises instead of silently picking one.
        """
        definition = self._defs[name]
        if not self.strict or not definition.parseable:
            return fs_match(definition, data)
        identified = fs_identify(self, data)
        if identified is None or identified[0].name != name:
            return None
        return identified[1]


def fs_identify(registry: FormatRegistry, data: bytes) -> Optional[Tuple[FormatDef, Bindings]]:
    found = None
    for definition in registry.parseable():
        bindings = fs_match(definition, data)
        if bindings is None:
            continue
        if found is not None:
            logger.error("bitstring %s parses as both %s and %s",
                         data.hex(), found[0].name, definition.name)
            raise FormatDisjointnessError(found[0].name, definition.name)
        found = (definition, bindings)
    return found


def _header(definition: FormatDef) -> Tuple[bytes, Optional[int]]:
    """Leading constant bytes and the width of the fixed-size header"""
    prefix = b""
    constant_run = True
    width = 0
    for fmt_field in definition.fields:
        if fmt_field.length.kind is LengthKind.CONST:
            size = fmt_field.length.size
        elif fmt_field.is_constant and isinstance(fmt_field.value.value, bytes):
            size = len(fmt_field.value.value)
        else:
            break
        if constant_run and fmt_field.is_constant:
            value = fmt_field.value.value
            if isinstance(value, int):
                little = fmt_field.reverse
                value = value.to_bytes(size, "little" if little else "big")
            prefix += value
        else:
            constant_run = False
        width += size
    return prefix, width


def lint_disjoint(registry: FormatRegistry) -> List[str]:
    """Best-effort warnings for pairs of formats a bitstring might satisfy both of"""
    warnings = []
    definitions = registry.parseable()
    for i, first in enumerate(definitions):
        for second in definitions[i + 1:]:
            prefix_a, width_a = _header(first)
            prefix_b, width_b = _header(second)
            shorter = min(len(prefix_a), len(prefix_b))
            if prefix_a[:shorter] != prefix_b[:shorter]:
                continue
            if width_a != width_b:
                continue
            warnings.append(
                f"formats '{first.name}' and '{second.name}' have no distinguishing "
                f"leading constant (header of {width_a} bytes)"
            )
    for warning in warnings:
        logger.warning(warning)
    return warnings
