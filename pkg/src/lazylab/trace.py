"""Ordered instrumentation events shared by both engines.

Every run owns one sink; event ordinals are strictly increasing within it.
"""

from dataclasses import dataclass
from enum import Enum


class EventKind(str, Enum):
    ENV_CREATED = "ENV_CREATED"
    ENV_DISCARDED = "ENV_DISCARDED"
    PROMISE_CREATED = "PROMISE_CREATED"
    PROMISE_FORCED = "PROMISE_FORCED"
    PROMISE_CACHE_HIT = "PROMISE_CACHE_HIT"
    NAME_REEVAL = "NAME_REEVAL"
    TABLE_CREATED = "TABLE_CREATED"
    TABLE_DELETED = "TABLE_DELETED"
    VAR_STORED = "VAR_STORED"
    VAR_RESOLVED = "VAR_RESOLVED"
    ARITH_EVAL = "ARITH_EVAL"
    OUTPUT_LINE = "OUTPUT_LINE"


@dataclass(frozen=True)
class TraceEvent:
    ord: int
    kind: EventKind
    subject: str
    detail: str


class TraceSink:
    """Collects trace events for one run, assigning 1-based ordinals."""

    def __init__(self):
        self.events: list[TraceEvent] = []
        self._next_ord = 1

    def emit(self, kind: EventKind, subject: str, detail: str = "") -> TraceEvent:
        ev = TraceEvent(self._next_ord, kind, subject, detail)
        self._next_ord += 1
        self.events.append(ev)
        return ev

    def of_kind(self, kind: EventKind) -> list[TraceEvent]:
        return [ev for ev in self.events if ev.kind is kind]

    def count(self, kind: EventKind) -> int:
        return sum(1 for ev in self.events if ev.kind is kind)
