"""
Mixins for engines.

The mixins add optional functionality to the classes in `pipelock.pipeline`.
"""
from __future__ import annotations

from abc import ABCMeta

from .exceptions import HazardInvariantError
from .pipeline import Event, EventKind, PipelineConfig

__all__ = [
    "EventLogMixin",
    "AdmissionGuardMixin",
]


class EventLogMixin(metaclass=ABCMeta):
    """
    Functionality for an engine that can record what happens in every cycle.

    Logging is off unless ``record_events`` is set; the log is cleared when a batch starts.
    """

    record_events: bool = False
    """Whether events are collected"""
    _events: list[Event]

    def reset_events(self) -> None:
        self._events = []

    def log_event(self, cycle: int, kind: EventKind, queue: int, w: int) -> None:
        if self.record_events:
            self._events.append(Event(cycle=cycle, kind=kind, queue=queue, w=w))

    @property
    def events(self) -> list[Event]:
        """
        :return: The events of the last batch, ordered by cycle (expire, arrive or drop, admit within a cycle)
        """
        return list(getattr(self, '_events', []))


class AdmissionGuardMixin(metaclass=ABCMeta):
    """
    Checks every admission against the conflict window.

    This is a runtime assertion independent of how the engine tracks the headers in flight:
    it remembers the last admission of every compressed key and fails if a new one falls inside the window.
    """

    config: PipelineConfig
    _last_admission: dict[int, int]

    def reset_guard(self) -> None:
        self._last_admission = {}

    def guard_admission(self, w: int, cycle: int) -> None:
        """
        :param w: The compressed key of the admitted header
        :param cycle: The admission cycle
        :raises HazardInvariantError: If a header with the same ``w`` was admitted inside the conflict window
        """
        previous = self._last_admission.get(w)
        if previous is not None and self.config.window.conflicts(cycle - previous, self.config.n):
            raise HazardInvariantError(
                "w=%d admitted in cycles %d and %d with N=%d" % (w, previous, cycle, self.config.n)
            )
        self._last_admission[w] = cycle
