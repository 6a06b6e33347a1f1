"""Chains rewrite layers in front of the monitoring sink"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from engine.diagnostics import Rejection
from engine.monitor import MonitorState, process_event
from engine.program_event import ProgramEvent
from rewrite.layer import RewriteLayer, rewrite_step
from terms.facts import GroundFact

logger = logging.getLogger(__name__)


@dataclass
class Pipeline:
    sink: MonitorState
    layers: List[RewriteLayer] = field(default_factory=list)


@dataclass(frozen=True)
class PipelineResult:
    sink: MonitorState
    rejection: Optional[Rejection] = None
    # index of the rejecting layer, None when the sink rejected
    layer: Optional[int] = None
    # input event index of the rejection, or the number of input events consumed
    index: int = 0
    layer_name: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.rejection is None

    def outputs(self) -> List[Tuple[GroundFact, ...]]:
        return self.sink.outputs()

    def describe(self) -> str:
        if self.rejection is None:
            return f"accepted {self.index} events"
        where = "monitor" if self.layer is None else f"layer {self.layer} ({self.layer_name})"
        return f"input event {self.index} rejected by {where}\n{self.rejection.report()}"


def _through_layers(pipeline: Pipeline, event: ProgramEvent):
    """Events reaching the sink, or (layer index, rejection)"""
    current = [event]
    for position, layer in enumerate(pipeline.layers):
        emitted: List[ProgramEvent] = []
        for item in current:
            result = rewrite_step(layer, item)
            if isinstance(result, Rejection):
                return None, (position, result)
            emitted.extend(result)
        current = emitted
    return current, None


def run_pipeline(pipeline: Pipeline, events: Iterable[ProgramEvent]) -> PipelineResult:
    """Feed each input event through every layer, then into the sink, in order"""
    sink = pipeline.sink
    consumed = 0
    for index, event in enumerate(events):
        delivered, failure = _through_layers(pipeline, event)
        if failure is not None:
            position, rejection = failure
            name = pipeline.layers[position].name
            logger.error("layer %d (%s) rejected input event %d", position, name, index)
            pipeline.sink = sink
            return PipelineResult(sink, rejection, position, index, name)
        for item in delivered:
            result = process_event(sink, item)
            if isinstance(result, Rejection):
                pipeline.sink = sink
                return PipelineResult(sink, result, None, index)
            sink = result
        consumed = index + 1
    pipeline.sink = sink
    return PipelineResult(sink, None, None, consumed)
