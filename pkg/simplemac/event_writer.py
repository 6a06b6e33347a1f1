"""Single writer for the event lines of an instrumented program"""
import threading
import time
from typing import IO, Optional, Sequence

from engine.program_event import ProgramEvent
from events.event_validator import format_event_line


class EventWriter:
    """Serialises events from any number of threads into one ordered stream"""

    def __init__(self, stream: IO[str], timestamps: bool = True):
        self.stream = stream
        self.timestamps = timestamps
        self.count = 0
        self._lock = threading.Lock()

    def emit(self, name: str, args: Sequence[bytes] = (), ret: bytes = b"", tid: Optional[str] = None) -> ProgramEvent:
        with self._lock:
            event = ProgramEvent(
                name, tuple(args), ret, ts=time.time_ns() if self.timestamps else None, tid=tid,
            )
            self.stream.write(format_event_line(event) + "\n")
            self.stream.flush()
            self.count += 1
        return event
