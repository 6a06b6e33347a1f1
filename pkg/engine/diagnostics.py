"""
Per-event explanations of why branches died, and the rejection report
built from them.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from engine.program_event import EventPattern, ProgramEvent

EQ_FAILED = "eq-failed"
CONSTRUCTION_FAILED = "construction-failed"
HINT_DROPPED = "hint-dropped"
STEP_FAILED = "epsilon-failed"
NO_RULE = "no-rule"


@dataclass(frozen=True)
class Explanation:
    kind: str
    rule: Optional[str]
    message: str
    lineage: Optional[int] = None

    def __str__(self):
        where = f"configuration #{self.lineage}" if self.lineage is not None else "monitor"
        rule = f" rule {self.rule}:" if self.rule else ""
        return f"{where}:{rule} {self.message} [{self.kind}]"


class Diagnostics:
    """Collects explanations while one event is processed"""

    def __init__(self):
        self.explanations: List[Explanation] = []

    def add(self, kind: str, rule: Optional[str], message: str, lineage: Optional[int] = None):
        explanation = Explanation(kind, rule, message, lineage)
        if explanation not in self.explanations:
            self.explanations.append(explanation)

    def __iter__(self):
        return iter(self.explanations)

    def __len__(self):
        return len(self.explanations)


@dataclass(frozen=True)
class Rejection:
    """An event no configuration could process"""
    event: ProgramEvent
    index: int
    explanations: Tuple[Explanation, ...] = ()
    permissible: Tuple[EventPattern, ...] = field(default=())

    def report(self) -> str:
        lines = [f"event {self.index} rejected: {self.event}"]
        if self.explanations:
            lines.append("explanations:")
            lines.extend(f"  {e}" for e in self.explanations)
        if self.permissible:
            lines.append("permissible events:")
            lines.extend(f"  {p}   (rule {p.rule}{', hint' if p.hint else ''})" for p in self.permissible)
        else:
            lines.append("no event is permissible")
        return "\n".join(lines)

    def __str__(self):
        return self.report()
