"""
Locking experiments.

Every sampled batch is simulated on a fresh engine. Throughput is reduced to the minimum over the batches,
latency to the maximum of the per-batch 99th percentiles.
"""
from __future__ import annotations

import logging

from dataclasses import dataclass, field
from typing import Any, Iterable

from .. import PacketRecord
from ..exceptions import TraceError
from ..flow import FlowKeyMode, HashParams
from ..pipeline import Event, PipelineConfig
from ..pipeline.hazard import HazardAnalyzer, HazardConfig
from ..pipeline.locking import LockingPipeline
from ..protocols import EngineFactory
from ..trace import TraceSource
from ..units import nanoseconds
from .batching import BatchingPolicy, SampledTrace, percentile

__all__ = [
    "BatchMetrics",
    "ExperimentResult",
    "run_experiment",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchMetrics(object):
    """The results of one batch."""

    batch_index: int
    packets: int
    """The number of packets in the batch"""
    partial: bool
    """Whether the batch is shorter than the batch size"""
    fdh: float
    """The fraction of data hazards the batch would cause at the same N without locking"""
    received: int
    served: int
    dropped: int
    latency_p99_cycles: int
    """The 99th percentile of the admission latency"""
    latency_p99_ns: float

    @property
    def throughput(self) -> float:
        return self.served / self.received if self.received else 1.0


@dataclass
class ExperimentResult(object):
    """All batches of one experiment and their aggregates."""

    trace: str
    key_mode: FlowKeyMode
    config: PipelineConfig
    batches: list[BatchMetrics] = field(default_factory=list)
    events: list[tuple[int, Event]] = field(default_factory=list)
    """``(batch_index, event)`` of every batch, if events were recorded"""

    @property
    def min_throughput(self) -> float:
        """The lowest per-batch throughput."""
        return min(batch.throughput for batch in self.batches)

    @property
    def pooled_throughput(self) -> float:
        """All served over all received headers."""
        received = sum(batch.received for batch in self.batches)
        return sum(batch.served for batch in self.batches) / received if received else 1.0

    def throughput(self, pooled: bool = False) -> float:
        return self.pooled_throughput if pooled else self.min_throughput

    @property
    def latency_p99_cycles(self) -> int:
        """The highest per-batch 99th percentile latency."""
        return max(batch.latency_p99_cycles for batch in self.batches)

    @property
    def latency_ns(self) -> float:
        return nanoseconds(cycles=self.latency_p99_cycles, clock_ghz=self.config.clock_ghz)

    @property
    def partial(self) -> bool:
        return any(batch.partial for batch in self.batches)

    def batch_rows(self) -> list[tuple[Any, ...]]:
        return [
            (
                self.trace, self.key_mode.label, b.batch_index, b.packets, int(b.partial), b.fdh, b.throughput,
                b.dropped, b.latency_p99_cycles, b.latency_p99_ns,
            )
            for b in self.batches
        ]

    def summary_row(self) -> tuple[Any, ...]:
        c = self.config
        return (
            self.trace, self.key_mode.label, c.n, c.q, c.q_len, c.w_bits, len(self.batches),
            self.min_throughput, self.pooled_throughput, self.latency_p99_cycles, self.latency_ns,
        )


def run_experiment(
        trace: SampledTrace | TraceSource | Iterable[PacketRecord],
        key_mode: FlowKeyMode,
        config: PipelineConfig,
        batching: BatchingPolicy | None = None,
        hash_params: HashParams = HashParams(),
        record_events: bool = False,
        engine: EngineFactory = LockingPipeline,
) -> ExperimentResult:
    """
    Run the locking engine on every sampled batch of a trace.

    :param trace: The trace, sampled batches are cached if a :class:`SampledTrace` is passed
    :param key_mode: The flow key mode
    :param config: The pipeline parameters
    :param batching: The batch sampling, the policy of ``trace`` or the defaults if not set
    :param hash_params: The CRC used for dispatch
    :param record_events: Collect the event log of every batch
    :param engine: The engine class
    :return: The per-batch metrics and their aggregates
    :raises TraceError: If the trace has no packets
    """
    key_mode = FlowKeyMode.parse(key_mode)
    sampled = SampledTrace.wrap(trace, batching)
    batches = sampled.batches()
    if not batches:
        raise TraceError("%s contains no packets" % sampled.name)

    analyzer = HazardAnalyzer(HazardConfig(
        n=config.n, key_mode=key_mode, chunk_bytes=config.chunk_bytes, gap_cycles=config.gap_cycles,
        window=config.window,
    ))
    simulator = engine(config, record_events=record_events)
    result = ExperimentResult(trace=sampled.name, key_mode=key_mode, config=config)
    for batch, headers in zip(batches, sampled.headers(key_mode, config, hash_params)):
        outcome = simulator.run_batch(headers)
        p99 = percentile(outcome.latencies, 99)
        result.batches.append(BatchMetrics(
            batch_index=batch.index,
            packets=len(batch),
            partial=batch.partial,
            fdh=analyzer.run_batch(headers).fdh,
            received=outcome.received,
            served=outcome.served,
            dropped=outcome.dropped,
            latency_p99_cycles=p99,
            latency_p99_ns=nanoseconds(cycles=p99, clock_ghz=config.clock_ghz),
        ))
        if record_events:
            result.events.extend((batch.index, event) for event in simulator.events)
        logger.debug("%s N=%d batch %d: throughput %.6f, p99 latency %d cycles",
                     sampled.name, config.n, batch.index, outcome.throughput, p99)

    logger.info("%s %s %s: min throughput %.6f, latency %.1f ns",
                sampled.name, key_mode.label, config, result.min_throughput, result.latency_ns)
    return result
