"""
Package for the stateful processing block and the engines that feed it

A stateful function occupies the block for N clock cycles: the first stage reads the state of the
packet's flow, the last one writes it back. A header that enters while another header of the same
flow is still travelling reads stale state, a data hazard.

---

Contains the following modules:

- ``pipelock.pipeline.hazard`` - counting data hazards without locking
- ``pipelock.pipeline.locking`` - the locking engine with queues and a cyclic priority scheduler
- ``pipelock.pipeline.oracle`` - a naive engine the locking engine is checked against

---
"""
from __future__ import annotations

import logging

from abc import ABCMeta, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Sequence

from .. import PacketRecord
from ..exceptions import ConfigurationError
from ..flow import FlowKeyMode, HashParams, dispatch, extract_key
from ..trace import ClockedHeader, assign_clocks

logger = logging.getLogger(__name__)

__all__ = [
    "hazard",
    "locking",
    "oracle",
    "HazardWindow",
    "PipelineConfig",
    "SimOutcome",
    "EventKind",
    "Event",
    "Engine",
    "clock_headers",
    "build_headers",
]


class HazardWindow(str, Enum):
    """
    When two headers of the same flow conflict.

    ``inclusive``: a header entering ``gap`` cycles after its predecessor conflicts if ``gap <= N``.
    ``exclusive``: it conflicts if ``gap < N``, the successor may enter in the cycle its predecessor writes back.

    Neither window ever blocks for ``N = 1``, reading and writing happen in the same cycle.
    """

    INCLUSIVE = 'inclusive'
    EXCLUSIVE = 'exclusive'

    def conflicts(self, gap: int, n: int) -> bool:
        """Whether entries ``gap`` cycles apart conflict in a pipeline of depth ``n``."""
        if n < 2:
            return False
        return gap <= n if self is HazardWindow.INCLUSIVE else gap < n

    def lifetime(self, n: int) -> int:
        """The largest gap that still conflicts; an admitted header is in flight for this many cycles after entry."""
        if n < 2:
            return 0
        return n if self is HazardWindow.INCLUSIVE else n - 1


@dataclass(frozen=True)
class PipelineConfig(object):
    """
    The parameters of the locking architecture.
    """

    n: int = 1
    """The pipeline depth N in clock cycles"""
    q: int = 1
    """The number of queues Q"""
    q_len: int = 10
    """The capacity Q_len of every queue, in headers"""
    w_bits: int = 4
    """The width W of the compressed key the scheduler compares"""
    chunk_bytes: int = 80
    """Bytes received per clock cycle"""
    gap_cycles: int = 0
    """Idle cycles between two packets"""
    clock_ghz: float = 1.0
    """The clock frequency, used to convert cycles to nanoseconds"""
    window: HazardWindow = HazardWindow.INCLUSIVE
    """The conflict window of the scheduler"""

    def __post_init__(self) -> None:
        object.__setattr__(self, 'window', HazardWindow(self.window))
        if self.n < 1:
            raise ConfigurationError("N must be at least 1, got %r" % self.n)
        if self.q < 1:
            raise ConfigurationError("Q must be at least 1, got %r" % self.q)
        if self.q_len < 1:
            raise ConfigurationError("Q_len must be at least 1, got %r" % self.q_len)
        if not 1 <= self.w_bits <= 16:
            raise ConfigurationError("W must be between 1 and 16 bits, got %r" % self.w_bits)
        if self.chunk_bytes < 1:
            raise ConfigurationError("chunk_bytes must be at least 1, got %r" % self.chunk_bytes)
        if self.gap_cycles < 0:
            raise ConfigurationError("gap_cycles must not be negative, got %r" % self.gap_cycles)
        if self.clock_ghz <= 0:
            raise ConfigurationError("The clock frequency must be positive, got %r" % self.clock_ghz)

    def replace(self, **changes: Any) -> PipelineConfig:
        return replace(self, **changes)

    @property
    def lifetime(self) -> int:
        """Cycles an admitted header blocks its compressed key, 0 if nothing is ever blocked."""
        return self.window.lifetime(self.n)


@dataclass
class SimOutcome(object):
    """The result of simulating one batch."""

    received: int = 0
    """Headers that arrived"""
    served: int = 0
    """Headers admitted into the pipeline"""
    dropped: int = 0
    """Headers dropped because their queue was full"""
    latencies: list[int] = field(default_factory=list)
    """Cycles between arrival and admission, one sample per served header in admission order"""
    cycles_elapsed: int = 0
    """The last simulated cycle"""

    @property
    def throughput(self) -> float:
        """Served over received headers, 1.0 if nothing was received."""
        return self.served / self.received if self.received else 1.0


class EventKind(str, Enum):
    ARRIVE = 'arrive'
    DROP = 'drop'
    ADMIT = 'admit'
    EXPIRE = 'expire'


@dataclass(frozen=True)
class Event(object):
    """One entry of the per-cycle event log."""

    cycle: int
    kind: EventKind
    queue: int
    w: int


class Engine(metaclass=ABCMeta):
    """
    Base class for everything that simulates a batch of headers.

    An engine keeps no state between batches: queues, in-flight headers, the priority pointer
    and the clock start over at every call of ``run_batch``.
    """

    config: PipelineConfig

    def __init__(self, config: PipelineConfig) -> None:
        self.config = config

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} {self.config}>"

    @abstractmethod
    def run_batch(self, headers: Sequence[ClockedHeader]) -> SimOutcome:
        """
        Simulate a batch.

        :param headers: The clocked and dispatched headers, in arrival order
        :return: The outcome of the batch
        """
        raise NotImplementedError


def clock_headers(
        records: Iterable[PacketRecord], key_mode: FlowKeyMode, chunk_bytes: int = 80, gap_cycles: int = 0,
) -> list[ClockedHeader]:
    """Clock a batch and key its packets, without dispatching them to queues."""
    key_mode = FlowKeyMode.parse(key_mode)
    records = list(records)
    return [
        ClockedHeader(record_index=index, ready_cycle=ready, flow_key=extract_key(record, key_mode))
        for (index, ready), record in zip(assign_clocks(records, chunk_bytes, gap_cycles), records)
    ]


def build_headers(
        records: Iterable[PacketRecord],
        key_mode: FlowKeyMode,
        config: PipelineConfig,
        hash_params: HashParams = HashParams(),
) -> list[ClockedHeader]:
    """
    Clock, key and dispatch a batch of packets.

    :param records: The packets of the batch, in arrival order
    :param key_mode: The flow key mode
    :param config: Provides the clocking parameters, Q and W
    :param hash_params: The CRC used for dispatch
    :return: The headers, ready to be simulated
    """
    headers = []
    for header in clock_headers(records, key_mode, config.chunk_bytes, config.gap_cycles):
        queue_index, w = dispatch(header.flow_key, config.q, config.w_bits, hash_params)
        headers.append(replace(header, queue_index=queue_index, w=w))
    return headers
