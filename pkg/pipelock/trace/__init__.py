"""
Package for packet traces

A trace is a stream of `pipelock.PacketRecord` objects.
Arrival times in the source files are ignored: packets are modeled as arriving back-to-back
(optionally separated by a fixed gap) and each one is ready once all of its bytes have been read.

---

Contains the following modules:

- ``pipelock.trace.pcap`` - classic libpcap files
- ``pipelock.trace.text`` - CSV traces
- ``pipelock.trace.synthetic`` - deterministic synthetic traces
- ``pipelock.trace.stats`` - packet size and flow count statistics

---
"""
from __future__ import annotations

import logging
import os

from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, TYPE_CHECKING

from .. import PacketRecord
from ..exceptions import ConfigurationError
from ..units import reception_cycles

if TYPE_CHECKING:
    from ..flow import FlowKey

logger = logging.getLogger(__name__)

__all__ = [
    "pcap",
    "stats",
    "synthetic",
    "text",
    "TraceSource",
    "ClockedHeader",
    "assign_clocks",
    "open_trace",
    "TRACE_FORMATS",
]

TRACE_FORMATS = ('pcap', 'csv', 'synthetic')


class TraceSource(metaclass=ABCMeta):
    """
    Base class for everything packets can be read from.

    Iterating a source yields its records from the start every time.
    Used as a context manager ``open`` and ``close`` are called automatically.
    """

    name: str
    """A short name for the trace, used as the ``trace`` column of output files."""

    def __enter__(self) -> TraceSource:
        self.open()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()

    def __iter__(self) -> Iterator[PacketRecord]:
        return self.records()

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} {self.name}>"

    def open(self) -> None:
        """Check that the trace can be read.

        Raises:
          TraceError: If the trace does not exist or is not in the expected format.
        """
        pass

    def close(self) -> None:
        """Release what ``open`` acquired."""
        pass

    @abstractmethod
    def records(self) -> Iterator[PacketRecord]:
        """Yield the packet records of the trace in order."""
        raise NotImplementedError


@dataclass(frozen=True)
class ClockedHeader(object):
    """
    The header of a packet once it has been received, as it is handed to the stateful block.
    """

    record_index: int
    """The position of the packet in its batch"""
    ready_cycle: int
    """The clock cycle at which the packet has been completely received"""
    flow_key: FlowKey
    """The flow key of the packet"""
    queue_index: int = 0
    """The queue the dispatcher stores the header in, ``hash(FK) mod Q``"""
    w: int = 0
    """The compressed key the scheduler compares, ``hash(FK) mod 2^W``"""


def assign_clocks(
        records: Iterable[PacketRecord], chunk_bytes: int = 80, gap_cycles: int = 0,
) -> Iterator[tuple[int, int]]:
    """
    Compute the cycle at which every packet has been completely received.

    Reception of a packet takes ``ceil(wire_len / chunk_bytes)`` cycles; the first packet is ready after its
    own reception time and every following one ``gap_cycles`` plus its reception time after its predecessor.

    :param records: The packets, in arrival order
    :param chunk_bytes: Bytes read per clock cycle
    :param gap_cycles: Idle cycles between two packets, 0 for back-to-back arrivals
    :return: A generator of ``(record_index, ready_cycle)``
    """
    if chunk_bytes < 1:
        raise ConfigurationError("chunk_bytes must be at least 1, got %r" % chunk_bytes)
    if gap_cycles < 0:
        raise ConfigurationError("gap_cycles must not be negative, got %r" % gap_cycles)

    ready = 0
    for index, record in enumerate(records):
        if index:
            ready += gap_cycles
        ready += reception_cycles(record.wire_len, chunk_bytes)
        yield index, ready


def open_trace(path: str | os.PathLike, format: str | None = None, **kwargs) -> TraceSource:  # noqa: F402
    """
    Create the trace source for ``path``.

    :param path: A pcap file, a CSV trace or a synthetic trace spec (JSON or YAML)
    :param format: One of ``pcap``, ``csv``, ``synthetic``; guessed from the file suffix if left out
    :param kwargs: Passed on to the source class
    :return: The (not yet opened) trace source
    """
    path = Path(path)
    if format is None:
        format = {
            '.pcap': 'pcap', '.cap': 'pcap', '.csv': 'csv',
            '.json': 'synthetic', '.yaml': 'synthetic', '.yml': 'synthetic',
        }.get(path.suffix.lower())
    if format == 'pcap':
        from .pcap import PcapTrace
        return PcapTrace(path)
    if format == 'csv':
        from .text import CsvTrace
        return CsvTrace(path, **kwargs)
    if format == 'synthetic':
        from .synthetic import SyntheticTrace
        return SyntheticTrace.from_file(path)
    raise ConfigurationError(
        "Unknown trace format %r for %s, choose one of %s" % (format, path, ', '.join(TRACE_FORMATS))
    )
