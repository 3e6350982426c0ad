"""
Data hazards in a pipeline without locking.

Every header enters the stateful block in the cycle it has been received. A header causes a hazard
if an earlier header of the same flow entered within the conflict window, so only the most recent
header of every flow has to be remembered. Each entering header counts at most one hazard.
"""
from __future__ import annotations

import logging

from dataclasses import dataclass, field
from typing import Iterable, Sequence, TYPE_CHECKING

import numpy as np

from ..exceptions import ConfigurationError
from ..flow import FlowKeyMode
from ..trace import ClockedHeader, TraceSource
from . import HazardWindow

if TYPE_CHECKING:
    from ..experiment.batching import BatchingPolicy

__all__ = [
    "HazardConfig",
    "HazardResult",
    "HazardAnalyzer",
    "FdhCurve",
    "hazard_predicate",
    "run_hazard_batch",
    "same_key_gaps",
    "hazard_counts",
    "fdh_curve",
]

logger = logging.getLogger(__name__)


def hazard_predicate(gap: int, n: int, window: HazardWindow = HazardWindow.INCLUSIVE) -> bool:
    """
    Whether a header entering ``gap`` cycles after the previous header of its flow causes a hazard.

    >>> hazard_predicate(19, 18), hazard_predicate(19, 19), hazard_predicate(1, 1)
    (False, True, False)

    :param gap: Cycles between the two entries, at least 1
    :param n: The pipeline depth N
    :param window: ``gap <= N`` (inclusive) or ``gap < N`` (exclusive); never for ``N = 1``
    """
    return window.conflicts(gap, n)


@dataclass(frozen=True)
class HazardConfig(object):
    n: int = 1
    """The pipeline depth N"""
    key_mode: FlowKeyMode = FlowKeyMode.FIVE_TUPLE
    """What makes two headers the same flow"""
    chunk_bytes: int = 80
    """Bytes received per clock cycle"""
    gap_cycles: int = 0
    """Idle cycles between two packets"""
    window: HazardWindow = HazardWindow.INCLUSIVE
    """The conflict window"""

    def __post_init__(self) -> None:
        object.__setattr__(self, 'window', HazardWindow(self.window))
        object.__setattr__(self, 'key_mode', FlowKeyMode.parse(self.key_mode))
        if self.n < 1:
            raise ConfigurationError("N must be at least 1, got %r" % self.n)


@dataclass(frozen=True)
class HazardResult(object):
    hazards: int = 0
    """Headers that entered while a header of their flow was in flight"""
    total_cycles: int = 0
    """The cycle in which the last header of the batch was received"""

    @property
    def fdh(self) -> float:
        """The fraction of data hazards, hazards over total cycles (0 for an empty batch)."""
        return self.hazards / self.total_cycles if self.total_cycles else 0.0


def same_key_gaps(headers: Iterable[ClockedHeader]) -> np.ndarray:
    """
    For every header that is not the first of its flow, the cycles since the previous header of the flow.

    :param headers: The clocked headers, in arrival order
    :return: The gaps in arrival order
    """
    last_entry: dict[bytes, int] = {}
    gaps = []
    for header in headers:
        key = header.flow_key.bytes
        previous = last_entry.get(key)
        if previous is not None:
            gaps.append(header.ready_cycle - previous)
        last_entry[key] = header.ready_cycle
    return np.asarray(gaps, dtype=np.int64)


def hazard_counts(gaps: np.ndarray, ns: Sequence[int], window: HazardWindow = HazardWindow.INCLUSIVE) -> np.ndarray:
    """
    Count the hazards of one batch for many pipeline depths at once.

    :param gaps: The output of :func:`same_key_gaps`
    :param ns: The pipeline depths
    :param window: The conflict window
    :return: The number of hazards for every depth in ``ns``
    """
    window = HazardWindow(window)
    ordered = np.sort(gaps)
    ns = np.asarray(ns, dtype=np.int64)
    side = 'right' if window is HazardWindow.INCLUSIVE else 'left'
    counts = np.searchsorted(ordered, ns, side=side)
    return np.where(ns >= 2, counts, 0)


class HazardAnalyzer(object):
    """Counts the hazards of batches for one :class:`HazardConfig`."""

    config: HazardConfig

    def __init__(self, config: HazardConfig) -> None:
        self.config = config

    def run_batch(self, headers: Sequence[ClockedHeader]) -> HazardResult:
        if not headers:
            return HazardResult()
        counts = hazard_counts(same_key_gaps(headers), [self.config.n], self.config.window)
        return HazardResult(hazards=int(counts[0]), total_cycles=headers[-1].ready_cycle)


def run_hazard_batch(headers: Sequence[ClockedHeader], config: HazardConfig) -> HazardResult:
    """
    Count the data hazards of a batch.

    :param headers: The clocked headers of the batch, in arrival order
    :param config: The pipeline depth and conflict window
    :return: The hazard count and the cycles needed to receive the batch
    """
    return HazardAnalyzer(config).run_batch(headers)


@dataclass
class FdhCurve(object):
    """The 99th percentile FDH over the sampled batches of a trace, for every pipeline depth."""

    trace: str
    key_mode: FlowKeyMode
    fdh_p99: dict[int, float] = field(default_factory=dict)
    """Pipeline depth to the 99th percentile of the per-batch FDH"""
    batches: int = 0
    """The number of batches the percentile is taken over"""
    partial: bool = False
    """Whether the only batch is shorter than the batch size"""

    def rows(self) -> list[tuple]:
        return [(self.trace, self.key_mode.label, n, fdh, self.batches) for n, fdh in self.fdh_p99.items()]


def fdh_curve(
        trace: TraceSource | Iterable,
        key_mode: FlowKeyMode,
        n_range: Sequence[int],
        batching: BatchingPolicy | None = None,
        chunk_bytes: int = 80,
        gap_cycles: int = 0,
        window: HazardWindow = HazardWindow.INCLUSIVE,
) -> FdhCurve:
    """
    Compute the FDH of every sampled batch for every N and take the 99th percentile per N.

    :param trace: A trace source, a :class:`pipelock.experiment.batching.SampledTrace` or plain records
    :param key_mode: The flow key mode
    :param n_range: The pipeline depths
    :param batching: The :class:`pipelock.experiment.batching.BatchingPolicy`, the defaults if not set
    :param chunk_bytes: Bytes received per clock cycle
    :param gap_cycles: Idle cycles between two packets
    :param window: The conflict window
    :return: The curve
    """
    from ..experiment.batching import SampledTrace, percentile

    if not n_range:
        raise ConfigurationError("The range of pipeline depths is empty")
    if any(n < 1 for n in n_range):
        raise ConfigurationError("Pipeline depths must be at least 1")

    key_mode = FlowKeyMode.parse(key_mode)
    sampled = SampledTrace.wrap(trace, batching)
    batches = sampled.batches()
    per_batch = []
    for index, headers in enumerate(sampled.clocked(key_mode, chunk_bytes, gap_cycles)):
        total = headers[-1].ready_cycle
        counts = hazard_counts(same_key_gaps(headers), n_range, window)
        per_batch.append(counts / total)
        logger.debug("%s batch %d: %d headers, %d cycles", sampled.name, index, len(headers), total)

    curve = FdhCurve(
        trace=sampled.name,
        key_mode=key_mode,
        batches=len(batches),
        partial=any(batch.partial for batch in batches),
    )
    if not per_batch:
        logger.warning("%s has no packets, no FDH computed", sampled.name)
        return curve
    samples = np.vstack(per_batch)
    for column, n in enumerate(n_range):
        curve.fdh_p99[int(n)] = float(percentile(samples[:, column], 99))
    return curve
