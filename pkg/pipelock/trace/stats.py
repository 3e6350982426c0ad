"""
Trace statistics: the packet size distribution and the number of flows per window of packets.
"""
from __future__ import annotations

import logging

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .. import PacketRecord
from ..exceptions import ConfigurationError
from ..flow import FlowKeyMode, extract_key

__all__ = [
    "TraceStats",
    "trace_stats",
]

logger = logging.getLogger(__name__)


@dataclass
class TraceStats(object):
    """Statistics of one trace."""

    packets: int = 0
    """The number of packets in the trace"""
    window: int = 1_000_000
    """The window length in packets"""
    size_cdf: list[tuple[int, float]] = field(default_factory=list)
    """``(size, fraction of packets not larger than size)`` for every distinct size, ascending"""
    windows: dict[FlowKeyMode, list[int]] = field(default_factory=dict)
    """The number of distinct flow keys in every counted window, per key mode"""
    partial: bool = False
    """Whether the trace is shorter than one window and the counts come from the partial window"""

    def mean_flows(self, mode: FlowKeyMode) -> float:
        """The mean number of distinct keys over the counted windows, 0 for an empty trace."""
        counts = self.windows.get(mode, [])
        return float(np.mean(counts)) if counts else 0.0

    def cdf_at(self, size: int) -> float:
        """The fraction of packets of at most ``size`` bytes."""
        fraction = 0.0
        for s, f in self.size_cdf:
            if s > size:
                break
            fraction = f
        return fraction


def trace_stats(
        records: Iterable[PacketRecord],
        key_modes: Iterable[FlowKeyMode] | FlowKeyMode = (FlowKeyMode.FIVE_TUPLE,),
        window: int = 1_000_000,
) -> TraceStats:
    """
    Compute the size CDF and the flows per window of a trace in one pass.

    Only complete windows are counted. If the trace is shorter than one window the partial window is
    counted instead and the result is flagged as ``partial``.

    :param records: The packets
    :param key_modes: The key modes to count flows for
    :param window: The window length in packets
    :return: The statistics
    """
    if window < 1:
        raise ConfigurationError("The stats window must be at least 1 packet, got %r" % window)
    modes = [key_modes] if isinstance(key_modes, FlowKeyMode) else list(key_modes)

    sizes: Counter[int] = Counter()
    complete: dict[FlowKeyMode, list[int]] = {mode: [] for mode in modes}
    current: dict[FlowKeyMode, set[bytes]] = {mode: set() for mode in modes}
    packets = 0
    for record in records:
        sizes[record.wire_len] += 1
        for mode in modes:
            current[mode].add(extract_key(record, mode).bytes)
        packets += 1
        if packets % window == 0:
            for mode in modes:
                complete[mode].append(len(current[mode]))
                current[mode] = set()

    stats = TraceStats(packets=packets, window=window, windows=complete)
    if packets and packets < window:
        stats.partial = True
        stats.windows = {mode: [len(current[mode])] for mode in modes}
        logger.warning("The trace has %d packets, less than one window of %d; using the partial window",
                       packets, window)

    if packets:
        distinct = sorted(sizes)
        cumulative = np.cumsum([sizes[s] for s in distinct])
        stats.size_cdf = [(s, float(c) / packets) for s, c in zip(distinct, cumulative.tolist())]
    return stats
