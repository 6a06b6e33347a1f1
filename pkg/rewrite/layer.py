"""
A rewrite layer: one monitor instance in rewrite mode whose emitted
events become the input of the next stage.
"""
import logging
from dataclasses import replace
from typing import Iterable, List, Optional, Union

from decompose.split_rule import split_ruleset
from engine.configuration import Configuration
from engine.diagnostics import Rejection
from engine.monitor import MonitorState, initial_state, process_event
from engine.program_event import ProgramEvent
from errors.monitor_errors import SpecError
from protocol_spec.elaborate import elaborate
from protocol_spec.model import EMIT, MODE_REWRITE, SpecFile
from protocol_spec.parser import load_spec
from terms.facts import GroundFact
from terms.term import Value

logger = logging.getLogger(__name__)


def _as_bytes(value: Value) -> bytes:
    if isinstance(value, int):
        return value.to_bytes(max(1, (value.bit_length() + 7) // 8), "big")
    return value


def event_from_fact(fact: GroundFact) -> ProgramEvent:
    """``Emit(f, a1..an, r)`` becomes ``f(a1..an) -> r``; any other event keeps its name and returns nothing"""
    if fact.symbol == EMIT:
        name, *args, ret = fact.args
        return ProgramEvent(_as_bytes(name).decode("ascii"), tuple(_as_bytes(a) for a in args), _as_bytes(ret))
    return ProgramEvent(fact.symbol, tuple(_as_bytes(a) for a in fact.args), b"")


class RewriteLayer:
    """Holds the single configuration of a rewrite-mode monitor between events"""

    def __init__(self, state: MonitorState, name: str = "layer"):
        if state.mode != MODE_REWRITE:
            raise SpecError(f"{name} is not a rewrite layer")
        self.state = state
        self.name = name

    @classmethod
    def from_spec(cls, spec: SpecFile, name: Optional[str] = None) -> "RewriteLayer":
        name = name or spec.name or "layer"
        if spec.mode != MODE_REWRITE:
            raise SpecError(f"{name} is not marked 'mode: {MODE_REWRITE}'")
        elaboration = elaborate(spec)
        rules = split_ruleset(elaboration.rules, include_special=False)
        logger.info("rewrite layer %s: %d rules", name, len(rules))
        return cls(initial_state(rules, spec.formats, mode=MODE_REWRITE), name)

    @classmethod
    def from_file(cls, path: str, flags: Optional[Iterable[str]] = None) -> "RewriteLayer":
        return cls.from_spec(load_spec(path, flags))

    def facts(self) -> List[GroundFact]:
        return list(self.state.configs[0].state)


def rewrite_step(layer: RewriteLayer, event: ProgramEvent) -> Union[List[ProgramEvent], Rejection]:
    """Process one event; returns the emitted events in application order"""
    result = process_event(layer.state, event)
    if isinstance(result, Rejection):
        return result
    config = result.configs[0]
    emitted = [event_from_fact(f) for f in config.out_trace]
    # the out trace is handed on, not kept
    layer.state = replace(result, configs=(Configuration(config.state, (), config.lineage),))
    logger.debug("%s: %s -> %d events", layer.name, event, len(emitted))
    return emitted
