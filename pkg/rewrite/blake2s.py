"""The bundled blake2s digest layer"""
from typing import Iterable, List, Optional, Union

from config.config import Config
from engine.diagnostics import Rejection
from engine.program_event import ProgramEvent
from rewrite.layer import RewriteLayer, rewrite_step

RESET = "Reset"


def blake2s_layer(flags: Optional[Iterable[str]] = None) -> RewriteLayer:
    return RewriteLayer.from_file(Config.BLAKE2S_LAYER_PATH, flags)


def stateful_reset(layer: RewriteLayer, digest: bytes) -> Union[List[ProgramEvent], Rejection]:
    """Send ``Reset(digest)`` through the layer: accumulated input is discarded"""
    return rewrite_step(layer, ProgramEvent(RESET, (digest,), b""))
