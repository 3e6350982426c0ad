"""
A deliberately naive engine for checking :mod:`pipelock.pipeline.locking`.

It steps through every single cycle and decides whether a head of line header may enter by walking
back through the list of all admissions. Queues are plain lists. Use it for batches of a few thousand headers.
"""
from __future__ import annotations

import logging

from typing import Sequence

from ..mixins import EventLogMixin
from ..trace import ClockedHeader
from . import Engine, EventKind, PipelineConfig, SimOutcome

__all__ = [
    "ReferenceOracle",
    "reference_oracle",
]

logger = logging.getLogger(__name__)


class ReferenceOracle(EventLogMixin, Engine):
    """Every-cycle simulation of the locking architecture, for comparison."""

    def __init__(self, config: PipelineConfig, record_events: bool = False) -> None:
        super(ReferenceOracle, self).__init__(config)
        self.record_events = record_events
        self.reset_events()

    def _in_flight(self, history: list[tuple[int, int, int]], w: int, cycle: int) -> bool:
        """Whether an admission of ``w`` in the history still conflicts with an entry at ``cycle``."""
        for admitted_w, admitted, _ in reversed(history):
            if cycle - admitted > self.config.lifetime:
                return False
            if admitted_w == w and self.config.window.conflicts(cycle - admitted, self.config.n):
                return True
        return False

    def run_batch(self, headers: Sequence[ClockedHeader]) -> SimOutcome:
        self.reset_events()
        config = self.config
        lifetime = config.lifetime
        queues: list[list[ClockedHeader]] = [[] for _ in range(config.q)]
        history: list[tuple[int, int, int]] = []  # (w, admit cycle, queue) of every admission
        outcome = SimOutcome(received=len(headers))
        pointer = 0
        cycle = 0
        arrived = 0

        while arrived < len(headers) or any(queues):
            cycle += 1

            if lifetime and self.record_events:
                for w, admitted, queue in history:
                    if cycle - admitted == lifetime + 1:
                        self.log_event(cycle, EventKind.EXPIRE, queue, w)

            while arrived < len(headers) and headers[arrived].ready_cycle == cycle:
                header = headers[arrived]
                arrived += 1
                if len(queues[header.queue_index]) >= config.q_len:
                    outcome.dropped += 1
                    self.log_event(cycle, EventKind.DROP, header.queue_index, header.w)
                else:
                    queues[header.queue_index].append(header)
                    self.log_event(cycle, EventKind.ARRIVE, header.queue_index, header.w)

            for offset in range(config.q):
                index = (pointer + offset) % config.q
                if queues[index] and not self._in_flight(history, queues[index][0].w, cycle):
                    head = queues[index].pop(0)
                    outcome.served += 1
                    outcome.latencies.append(cycle - head.ready_cycle)
                    history.append((head.w, cycle, index))
                    self.log_event(cycle, EventKind.ADMIT, index, head.w)
                    pointer = (index + 1) % config.q
                    break

        outcome.cycles_elapsed = cycle
        return outcome


def reference_oracle(headers: Sequence[ClockedHeader], config: PipelineConfig) -> SimOutcome:
    """
    Simulate one batch with the naive engine.

    :param headers: The clocked and dispatched headers, in arrival order
    :param config: The pipeline parameters
    :return: The outcome, field for field what :func:`pipelock.pipeline.locking.run_locking_batch` returns
    """
    return ReferenceOracle(config).run_batch(headers)
