"""
The locking engine.

Headers wait in Q FIFO queues, the queue is picked by the hash of the flow key. In every cycle the
scheduler looks at the heads of the queues in cyclic order, starting at the priority pointer, and admits
the first head whose compressed key w is not in flight. After an admission the pointer moves to the queue
after the served one, if nothing can be admitted it stays.

Every cycle runs in this order:

1. expiry: headers admitted more than the conflict window ago leave the in-flight set
2. arrival: the header completed in this cycle is appended to its queue, or dropped if the queue is full
3. scheduling: at most one header is admitted

Cycles in which nothing can change are skipped.
"""
from __future__ import annotations

import logging

from collections import deque
from typing import Iterator, Sequence

from ..mixins import AdmissionGuardMixin, EventLogMixin
from ..trace import ClockedHeader
from . import Engine, EventKind, PipelineConfig, SimOutcome

__all__ = [
    "InFlightSet",
    "LockingPipeline",
    "run_locking_batch",
]

logger = logging.getLogger(__name__)


class InFlightSet(object):
    """
    The compressed keys of the headers currently travelling through the pipeline.

    Entries are kept in admission order; one admitted in cycle ``a`` leaves the set
    at the start of cycle ``a + lifetime + 1``.
    """

    lifetime: int
    _ring: deque[tuple[int, int, int]]
    _members: dict[int, int]

    def __init__(self, lifetime: int) -> None:
        self.lifetime = lifetime
        self._ring = deque()
        self._members = {}

    def __contains__(self, w: int) -> bool:
        return w in self._members

    def __len__(self) -> int:
        return len(self._ring)

    def __iter__(self) -> Iterator[int]:
        return (w for w, _, _ in self._ring)

    def add(self, w: int, cycle: int, queue: int = 0) -> None:
        self._ring.append((w, cycle, queue))
        self._members[w] = cycle

    def expire(self, cycle: int) -> list[tuple[int, int, int]]:
        """
        Remove the entries that are no longer in flight at ``cycle``.

        :return: ``(w, admit_cycle, queue)`` of every removed entry, oldest first
        """
        expired = []
        while self._ring and cycle - self._ring[0][1] > self.lifetime:
            entry = self._ring.popleft()
            del self._members[entry[0]]
            expired.append(entry)
        return expired

    def next_expiry(self) -> int | None:
        """The first cycle in which the oldest entry is gone, ``None`` if the set is empty."""
        return self._ring[0][1] + self.lifetime + 1 if self._ring else None


class LockingPipeline(AdmissionGuardMixin, EventLogMixin, Engine):
    """
    Cycle accurate model of the queues, the scheduler and the occupancy of the stateful block.

    Every admission is checked against the conflict window, a violation raises
    :class:`pipelock.exceptions.HazardInvariantError`.
    """

    def __init__(self, config: PipelineConfig, record_events: bool = False) -> None:
        super(LockingPipeline, self).__init__(config)
        self.record_events = record_events
        self.reset_events()
        self.reset_guard()

    def run_batch(self, headers: Sequence[ClockedHeader]) -> SimOutcome:
        config = self.config
        self.reset_events()
        self.reset_guard()

        blocking = config.lifetime > 0
        queues: list[deque[ClockedHeader]] = [deque() for _ in range(config.q)]
        in_flight = InFlightSet(config.lifetime)
        outcome = SimOutcome(received=len(headers))
        pointer = 0
        queued = 0
        pending = 0  # index of the next header to arrive
        cycle = 0

        while pending < len(headers) or queued:
            if queued:
                cycle += 1
            else:
                cycle = headers[pending].ready_cycle

            for w, admit_cycle, queue in in_flight.expire(cycle):
                self.log_event(admit_cycle + in_flight.lifetime + 1, EventKind.EXPIRE, queue, w)

            if pending < len(headers) and headers[pending].ready_cycle == cycle:
                header = headers[pending]
                pending += 1
                if len(queues[header.queue_index]) < config.q_len:
                    queues[header.queue_index].append(header)
                    queued += 1
                    self.log_event(cycle, EventKind.ARRIVE, header.queue_index, header.w)
                else:
                    outcome.dropped += 1
                    self.log_event(cycle, EventKind.DROP, header.queue_index, header.w)

            admitted = False
            for offset in range(config.q):
                index = (pointer + offset) % config.q
                if not queues[index]:
                    continue
                head = queues[index][0]
                if blocking and head.w in in_flight:
                    continue
                queues[index].popleft()
                queued -= 1
                outcome.served += 1
                outcome.latencies.append(cycle - head.ready_cycle)
                if blocking:
                    self.guard_admission(head.w, cycle)
                    in_flight.add(head.w, cycle, index)
                self.log_event(cycle, EventKind.ADMIT, index, head.w)
                pointer = (index + 1) % config.q
                admitted = True
                break

            if queued and not admitted:
                # every head is blocked until an entry expires or a header arrives
                wake = in_flight.next_expiry()
                if pending < len(headers):
                    wake = min(wake, headers[pending].ready_cycle)
                cycle = wake - 1

        outcome.cycles_elapsed = cycle
        logger.debug("%r: %d received, %d served, %d dropped in %d cycles",
                     self, outcome.received, outcome.served, outcome.dropped, cycle)
        return outcome


def run_locking_batch(headers: Sequence[ClockedHeader], config: PipelineConfig) -> SimOutcome:
    """
    Simulate one batch on the locking architecture.

    :param headers: The clocked and dispatched headers of the batch, in arrival order
    :param config: The pipeline parameters
    :return: The outcome of the batch
    """
    return LockingPipeline(config).run_batch(headers)
