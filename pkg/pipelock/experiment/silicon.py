"""
Silicon cost of the locking architecture: header buffers and the comparators of the scheduler.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..exceptions import ConfigurationError
from ..pipeline import PipelineConfig
from ..units import bits, kilobytes

__all__ = [
    "SiliconReport",
    "silicon_overhead",
    "HEADER_BYTES",
]

HEADER_BYTES = 88
"""80 bytes of packet header plus 8 bytes of metadata"""


@dataclass(frozen=True)
class SiliconReport(object):
    queue_memory_bytes: int
    """Memory for Q queues of Q_len headers"""
    comparator_count: int
    """Every queue head is compared with the N keys in flight"""
    comparator_bits: int
    """The total width of all comparators"""

    @property
    def queue_memory_bits(self) -> int:
        return int(bits(bytes=self.queue_memory_bytes))

    @property
    def queue_memory_kilobytes(self) -> float:
        return kilobytes(bytes=self.queue_memory_bytes)


def silicon_overhead(config: PipelineConfig, header_bytes: int = HEADER_BYTES) -> SiliconReport:
    """
    Compute the cost of a configuration.

    :param config: Provides Q, Q_len, N and W
    :param header_bytes: The size of a buffered header including its metadata
    :return: ``H_len * Q * Q_len`` bytes of queue memory and ``Q * N`` comparators of ``W`` bits
    """
    if header_bytes < 1:
        raise ConfigurationError("header_bytes must be positive, got %r" % header_bytes)
    return SiliconReport(
        queue_memory_bytes=header_bytes * config.q * config.q_len,
        comparator_count=config.q * config.n,
        comparator_bits=config.q * config.n * config.w_bits,
    )
