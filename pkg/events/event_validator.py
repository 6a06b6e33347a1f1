"""
Event line codec: one JSON object per line, byte values hex encoded.

    {"name": "hmac", "args": ["736563726574", "0268"], "ret": "9f1c..", "tid": 3}
"""
import json
from typing import Any, Dict, Iterable, Iterator, List, Optional

import jsonschema

from config.config import Config
from engine.program_event import ProgramEvent
from errors.monitor_errors import EventLineError


class EventValidator:
    """Validates decoded event lines against the event schema"""

    def __init__(self, schema_path: str = Config.EVENT_SCHEMA_PATH):
        with open(schema_path, "r", encoding="utf-8") as f:
            self.schema = json.load(f)
        jsonschema.Draft7Validator.check_schema(self.schema)
        self.validator = jsonschema.Draft7Validator(self.schema)

    def errors(self, data: Any) -> List[str]:
        """All schema violations, most relevant first"""
        found = sorted(self.validator.iter_errors(data), key=jsonschema.exceptions.relevance, reverse=True)
        return [self._describe(e) for e in found]

    @staticmethod
    def _describe(error: jsonschema.ValidationError) -> str:
        where = "/".join(str(p) for p in error.absolute_path)
        return f"{where}: {error.message}" if where else error.message

    def is_valid(self, data: Any) -> bool:
        return self.validator.is_valid(data)


_default_validator: Optional[EventValidator] = None


def _validator() -> EventValidator:
    global _default_validator
    if _default_validator is None:
        _default_validator = EventValidator()
    return _default_validator


def parse_event_line(line: str, line_number: int = 0, validator: Optional[EventValidator] = None) -> ProgramEvent:
    """Decode one event line; raises ``EventLineError`` naming the line"""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise EventLineError(line_number, f"invalid JSON: {exc.msg}") from None
    problems = (validator or _validator()).errors(data)
    if problems:
        raise EventLineError(line_number, problems[0])
    tid = data.get("tid")
    return ProgramEvent(
        name=data["name"],
        args=tuple(bytes.fromhex(a) for a in data["args"]),
        ret=bytes.fromhex(data["ret"]),
        ts=data.get("ts"),
        tid=None if tid is None else str(tid),
    )


def format_event_line(event: ProgramEvent) -> str:
    data: Dict[str, Any] = {
        "name": event.name,
        "args": [a.hex() for a in event.args],
        "ret": event.ret.hex(),
    }
    if event.ts is not None:
        data["ts"] = event.ts
    if event.tid is not None:
        data["tid"] = event.tid
    return json.dumps(data, separators=(", ", ": "))


def read_events(lines: Iterable[str], first_line: int = 1,
                validator: Optional[EventValidator] = None) -> Iterator[ProgramEvent]:
    """Lazily decode event lines, skipping blank ones"""
    for number, line in enumerate(lines, start=first_line):
        if line.strip():
            yield parse_event_line(line, number, validator)
