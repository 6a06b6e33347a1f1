"""A configuration: ground state plus the events emitted on the way there"""
from dataclasses import dataclass, field
from typing import Tuple

from terms.facts import FactMultiset, GroundFact


@dataclass(frozen=True)
class Configuration:
    state: FactMultiset = field(default_factory=FactMultiset)
    out_trace: Tuple[GroundFact, ...] = ()
    # identifies the branch in diagnostics
    lineage: int = field(default=0, compare=False)

    def sort_key(self):
        return self.state.sort_key(), tuple(f.sort_key() for f in self.out_trace)

    def with_lineage(self, lineage: int) -> "Configuration":
        return Configuration(self.state, self.out_trace, lineage)

    def __str__(self):
        trace = ", ".join(str(e) for e in self.out_trace)
        return f"#{self.lineage} state={self.state!r} trace=[{trace}]"
