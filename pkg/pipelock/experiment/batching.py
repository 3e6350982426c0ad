"""
Batch sampling and percentiles.
"""
from __future__ import annotations

import logging
import math

from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .. import PacketRecord
from ..data import Store, default, load_defaults, store
from ..exceptions import ConfigurationError, EmptySampleError
from ..flow import FlowKeyMode, HashParams
from ..pipeline import PipelineConfig, build_headers, clock_headers
from ..trace import ClockedHeader, TraceSource

__all__ = [
    "BatchingPolicy",
    "Batch",
    "SampledTrace",
    "iter_batches",
    "percentile",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchingPolicy(object):
    """Which packets of a trace are simulated."""

    batch_size: int = 100_000
    """Consecutive packets per batch"""
    batch_stride: int = 10_000_000
    """Packets between the starts of two batches"""

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be at least 1, got %r" % self.batch_size)
        if self.batch_stride < self.batch_size:
            raise ConfigurationError(
                "batch_stride (%r) must not be smaller than batch_size (%r)" % (self.batch_stride, self.batch_size)
            )

    @classmethod
    def from_defaults(cls, **overrides: Any) -> BatchingPolicy:
        values = dict(load_defaults()['batching'])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class Batch(object):
    index: int
    """The position of the batch among the sampled batches"""
    start: int
    """The position of the first packet of the batch in the trace"""
    records: tuple[PacketRecord, ...]
    """The packets"""
    partial: bool = False
    """Whether the trace ended before the batch was complete"""

    def __len__(self) -> int:
        return len(self.records)


def iter_batches(records: Iterable[PacketRecord], policy: BatchingPolicy = BatchingPolicy()) -> Iterator[Batch]:
    """
    Sample batches from a trace.

    Batch ``k`` holds the packets ``k * batch_stride`` to ``k * batch_stride + batch_size - 1``.
    An incomplete batch at the end of the trace is discarded, unless the trace is too short for a single
    complete batch: then the packets it has form one partial batch.

    :param records: The packets of the trace
    :param policy: Batch size and stride
    :return: A generator of batches
    """
    current: list[PacketRecord] = []
    index = 0
    for position, record in enumerate(records):
        if position % policy.batch_stride >= policy.batch_size:
            continue
        current.append(record)
        if len(current) == policy.batch_size:
            yield Batch(index=index, start=position + 1 - policy.batch_size, records=tuple(current))
            index += 1
            current = []

    if not current:
        return
    if index == 0:
        logger.warning("The trace has only %d packets, using a partial batch instead of %d packets",
                       len(current), policy.batch_size)
        yield Batch(index=0, start=0, records=tuple(current), partial=True)
    else:
        logger.debug("Discarding the incomplete last batch of %d packets", len(current))


def percentile(samples: Sequence[float] | np.ndarray, p: float) -> Any:
    """
    Nearest-rank percentile: the element at the 1-based rank ``ceil(p / 100 * n)`` of the sorted samples.

    >>> percentile([5, 1, 3], 50)
    3

    :param samples: The samples
    :param p: The percentile, in (0, 100]
    :return: One of the samples
    :raises EmptySampleError: If there are no samples
    """
    if not 0 < p <= 100:
        raise ConfigurationError("The percentile must be in (0, 100], got %r" % p)
    values = np.asarray(samples)
    if values.size == 0:
        raise EmptySampleError
    rank = min(max(math.ceil(round(p * values.size / 100, 9)), 1), values.size)
    return np.partition(values.ravel(), rank - 1)[rank - 1].item()


class SampledTrace(Store):
    """
    The sampled batches of a trace, with the headers derived from them cached per key mode and dispatch.

    The trace is read once, when the batches are first needed.
    """

    name: str
    policy: BatchingPolicy
    _source: TraceSource | Iterable[PacketRecord] | None

    def __init__(
            self,
            trace: TraceSource | Iterable[PacketRecord],
            policy: BatchingPolicy | None = None,
            name: str | None = None,
    ) -> None:
        super(SampledTrace, self).__init__()
        self._source = trace
        self.policy = policy or BatchingPolicy()
        self.name = default(name, getattr(trace, 'name', 'trace'))

    @classmethod
    def wrap(cls, trace: Any, policy: BatchingPolicy | None = None) -> SampledTrace:
        """Return ``trace`` if it already is a ``SampledTrace`` with a matching policy, else wrap it."""
        if not isinstance(trace, SampledTrace):
            return cls(trace, policy)
        if policy is None or policy == trace.policy:
            return trace
        if trace._source is None:
            raise ConfigurationError("%r can not be sampled again with %s" % (trace, policy))
        return cls(trace._source, policy, name=trace.name)

    @classmethod
    def from_batches(cls, name: str, batches: Iterable[Batch], policy: BatchingPolicy | None = None) -> SampledTrace:
        """A sampled trace whose batches are already known."""
        sampled = cls((), policy, name=name)
        sampled[('batches',)] = list(batches)
        sampled._source = None
        return sampled

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} {self.name} {self.policy}>"

    @store
    def batches(self) -> list[Batch]:
        """The sampled batches."""
        if isinstance(self._source, TraceSource):
            with self._source as source:
                batches = list(iter_batches(source, self.policy))
        else:
            batches = list(iter_batches(self._source, self.policy))
        logger.info("%s: sampled %d batches", self.name, len(batches))
        return batches

    @store
    def clocked(self, key_mode: FlowKeyMode, chunk_bytes: int = 80, gap_cycles: int = 0) -> list[list[ClockedHeader]]:
        """The keyed and clocked headers of every batch."""
        return [clock_headers(batch.records, key_mode, chunk_bytes, gap_cycles) for batch in self.batches()]

    @store
    def dispatched(
            self, key_mode: FlowKeyMode, chunk_bytes: int, gap_cycles: int, q: int, w_bits: int,
            hash_params: HashParams,
    ) -> list[list[ClockedHeader]]:
        """The headers of every batch, dispatched to ``q`` queues with ``w_bits`` wide compressed keys."""
        config = PipelineConfig(q=q, w_bits=w_bits, chunk_bytes=chunk_bytes, gap_cycles=gap_cycles)
        return [build_headers(batch.records, key_mode, config, hash_params) for batch in self.batches()]

    def headers(
            self, key_mode: FlowKeyMode, config: PipelineConfig, hash_params: HashParams = HashParams(),
    ) -> list[list[ClockedHeader]]:
        """The headers of every batch as the engine for ``config`` needs them, independent of N."""
        return self.dispatched(
            key_mode, config.chunk_bytes, config.gap_cycles, config.q, config.w_bits, hash_params,
        )
