"""
Deterministic synthetic traces.

A :class:`SyntheticSpec` describes a trace by a packet size model and a flow model.
The same spec always produces the same packets. Flow ``f`` is the TCP connection

    10.(f >> 16 & 255).(f >> 8 & 255).(f & 255):(1000 + f mod 60000) -> 192.168.0.1:80

Specs are stored as JSON or YAML documents::

    num_packets: 100000
    seed: 1
    size_model: {kind: bimodal, p_small: 0.3, small_bytes: 64, large_bytes: 1500}
    flow_model: {kind: zipf, num_flows: 1000, alpha: 1.0}
"""
from __future__ import annotations

import logging
import os

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np
import yaml

from .. import IPVersion, PacketRecord, TCP
from ..exceptions import ConfigurationError, TraceError, TraceFormatError
from . import TraceSource

__all__ = [
    "SizeModel",
    "FlowModel",
    "SyntheticSpec",
    "SyntheticTrace",
    "generate_synthetic",
    "flow_record",
    "constant",
    "bimodal",
    "histogram",
    "single_flow",
    "uniform",
    "zipf",
    "round_robin",
]

logger = logging.getLogger(__name__)

CHUNK = 1 << 16
"""Number of packets drawn from the generator at once"""
MAX_FLOWS = 1 << 24
"""Flow ids have to fit the last three octets of the source address"""

_DST_ADDR = 0xC0A80001  # 192.168.0.1


class SizeModelKind(str, Enum):
    CONSTANT = 'constant'
    BIMODAL = 'bimodal'
    HISTOGRAM = 'histogram'


class FlowModelKind(str, Enum):
    SINGLE_FLOW = 'single_flow'
    UNIFORM = 'uniform'
    ZIPF = 'zipf'
    ROUND_ROBIN = 'round_robin'


def _kind(enum: type[Enum], value: Any) -> Any:
    try:
        return enum(value)
    except ValueError as e:
        raise ConfigurationError(
            "Unknown kind %r, choose one of %s" % (value, ', '.join(k.value for k in enum))
        ) from e


@dataclass(frozen=True)
class SizeModel(object):
    """The distribution packet sizes are drawn from, independently for every packet."""

    kind: SizeModelKind
    """``constant``, ``bimodal`` or ``histogram``"""
    bytes: int = 64
    """The size of every packet (constant)"""
    p_small: float = 0.0
    """The probability of a small packet (bimodal)"""
    small_bytes: int = 64
    """The size of small packets (bimodal)"""
    large_bytes: int = 1500
    """The size of large packets (bimodal)"""
    bins: tuple[tuple[int, float], ...] = ()
    """``(size, weight)`` pairs, weights are normalized (histogram)"""

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', _kind(SizeModelKind, self.kind))
        object.__setattr__(self, 'bins', tuple((int(s), float(w)) for s, w in self.bins))
        if self.kind is SizeModelKind.CONSTANT and self.bytes < 1:
            raise ConfigurationError("Packet size must be at least 1 byte, got %r" % self.bytes)
        if self.kind is SizeModelKind.BIMODAL:
            if not 0.0 <= self.p_small <= 1.0:
                raise ConfigurationError("p_small must be a probability, got %r" % self.p_small)
            if min(self.small_bytes, self.large_bytes) < 1:
                raise ConfigurationError("Packet sizes must be at least 1 byte")
        if self.kind is SizeModelKind.HISTOGRAM:
            if not self.bins:
                raise ConfigurationError("A histogram needs at least one bin")
            if any(size < 1 for size, _ in self.bins):
                raise ConfigurationError("Packet sizes must be at least 1 byte")
            if any(weight < 0 for _, weight in self.bins) or sum(w for _, w in self.bins) <= 0:
                raise ConfigurationError("Histogram weights must be non-negative and not all zero")

    def distribution(self) -> tuple[np.ndarray, np.ndarray]:
        """The sizes and their probabilities."""
        if self.kind is SizeModelKind.CONSTANT:
            return np.array([self.bytes]), np.array([1.0])
        if self.kind is SizeModelKind.BIMODAL:
            return np.array([self.small_bytes, self.large_bytes]), np.array([self.p_small, 1.0 - self.p_small])
        sizes = np.array([size for size, _ in self.bins])
        weights = np.array([weight for _, weight in self.bins], dtype=float)
        return sizes, weights / weights.sum()

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` packet sizes."""
        if self.kind is SizeModelKind.CONSTANT:
            return np.full(count, self.bytes, dtype=np.int64)
        sizes, p = self.distribution()
        return rng.choice(sizes, size=count, p=p)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> SizeModel:
        doc = dict(doc)
        kind = _kind(SizeModelKind, doc.pop('kind'))
        if kind is SizeModelKind.HISTOGRAM:
            doc['bins'] = tuple(tuple(b) for b in doc.get('bins', ()))
        return cls(kind=kind, **doc)

    def to_dict(self) -> dict[str, Any]:
        if self.kind is SizeModelKind.CONSTANT:
            return {'kind': self.kind.value, 'bytes': self.bytes}
        if self.kind is SizeModelKind.BIMODAL:
            return {
                'kind': self.kind.value, 'p_small': self.p_small,
                'small_bytes': self.small_bytes, 'large_bytes': self.large_bytes,
            }
        return {'kind': self.kind.value, 'bins': [list(b) for b in self.bins]}


@dataclass(frozen=True)
class FlowModel(object):
    """How packets are assigned to flows."""

    kind: FlowModelKind
    """``single_flow``, ``uniform``, ``zipf`` or ``round_robin``"""
    num_flows: int = 1
    """The number of distinct flows"""
    alpha: float = 1.0
    """The Zipf exponent, flow ``k`` (counted from 1) is picked with a probability proportional to ``k^-alpha``"""
    flow_ids: tuple[int, ...] | None = None
    """The flows to cycle through (round_robin), ``0 .. num_flows - 1`` if not set"""

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', _kind(FlowModelKind, self.kind))
        if self.flow_ids is not None:
            object.__setattr__(self, 'flow_ids', tuple(int(f) for f in self.flow_ids))
            if self.kind is not FlowModelKind.ROUND_ROBIN:
                raise ConfigurationError("flow_ids can only be given for round_robin")
            if not self.flow_ids:
                raise ConfigurationError("flow_ids must not be empty")
            object.__setattr__(self, 'num_flows', len(self.flow_ids))
            if any(not 0 <= f < MAX_FLOWS for f in self.flow_ids):
                raise ConfigurationError("Flow ids must be in [0, %d)" % MAX_FLOWS)
        if self.kind is FlowModelKind.SINGLE_FLOW:
            object.__setattr__(self, 'num_flows', 1)
        if not 1 <= self.num_flows <= MAX_FLOWS:
            raise ConfigurationError("num_flows must be in [1, %d], got %r" % (MAX_FLOWS, self.num_flows))
        if self.kind is FlowModelKind.ZIPF and self.alpha < 0:
            raise ConfigurationError("alpha must not be negative, got %r" % self.alpha)

    @property
    def probabilities(self) -> np.ndarray:
        """The probability of every flow id ``0 .. num_flows - 1``."""
        if self.kind is FlowModelKind.ZIPF:
            weights = np.arange(1, self.num_flows + 1, dtype=float) ** -self.alpha
            return weights / weights.sum()
        return np.full(self.num_flows, 1.0 / self.num_flows)

    def sample(self, rng: np.random.Generator, start: int, count: int) -> np.ndarray:
        """
        Draw the flow ids of ``count`` packets.

        :param rng: The random generator
        :param start: The index of the first of the packets in the trace
        :param count: The number of packets
        """
        if self.kind is FlowModelKind.SINGLE_FLOW:
            return np.zeros(count, dtype=np.int64)
        if self.kind is FlowModelKind.UNIFORM:
            return rng.integers(0, self.num_flows, size=count)
        if self.kind is FlowModelKind.ZIPF:
            return rng.choice(self.num_flows, size=count, p=self.probabilities)
        ids = np.array(self.flow_ids if self.flow_ids is not None else range(self.num_flows), dtype=np.int64)
        return ids[(start + np.arange(count)) % len(ids)]

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> FlowModel:
        doc = dict(doc)
        kind = _kind(FlowModelKind, doc.pop('kind'))
        if doc.get('flow_ids') is not None:
            doc['flow_ids'] = tuple(doc['flow_ids'])
        return cls(kind=kind, **doc)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {'kind': self.kind.value}
        if self.kind is not FlowModelKind.SINGLE_FLOW:
            doc['num_flows'] = self.num_flows
        if self.kind is FlowModelKind.ZIPF:
            doc['alpha'] = self.alpha
        if self.flow_ids is not None:
            doc['flow_ids'] = list(self.flow_ids)
        return doc


def constant(bytes: int) -> SizeModel:  # noqa: F402
    """Every packet has ``bytes`` bytes."""
    return SizeModel(SizeModelKind.CONSTANT, bytes=bytes)


def bimodal(p_small: float, small_bytes: int = 64, large_bytes: int = 1500) -> SizeModel:
    """Packets have ``small_bytes`` with probability ``p_small``, otherwise ``large_bytes``."""
    return SizeModel(SizeModelKind.BIMODAL, p_small=p_small, small_bytes=small_bytes, large_bytes=large_bytes)


def histogram(bins: Sequence[tuple[int, float]]) -> SizeModel:
    """Packet sizes follow the ``(size, weight)`` histogram."""
    return SizeModel(SizeModelKind.HISTOGRAM, bins=tuple(bins))


def single_flow() -> FlowModel:
    return FlowModel(FlowModelKind.SINGLE_FLOW)


def uniform(num_flows: int) -> FlowModel:
    return FlowModel(FlowModelKind.UNIFORM, num_flows=num_flows)


def zipf(num_flows: int, alpha: float = 1.0) -> FlowModel:
    return FlowModel(FlowModelKind.ZIPF, num_flows=num_flows, alpha=alpha)


def round_robin(num_flows: int | None = None, flow_ids: Sequence[int] | None = None) -> FlowModel:
    """Packets cycle through the flows in a fixed order."""
    if flow_ids is not None:
        return FlowModel(FlowModelKind.ROUND_ROBIN, flow_ids=tuple(flow_ids))
    if num_flows is None:
        raise ConfigurationError("round_robin needs num_flows or flow_ids")
    return FlowModel(FlowModelKind.ROUND_ROBIN, num_flows=num_flows)


@dataclass(frozen=True)
class SyntheticSpec(object):
    """Everything needed to reproduce a synthetic trace."""

    num_packets: int
    """The length of the trace"""
    size_model: SizeModel
    """How packet sizes are drawn"""
    flow_model: FlowModel
    """How packets are assigned to flows"""
    seed: int = 0
    """The seed of the random generator"""

    def __post_init__(self) -> None:
        if self.num_packets < 0:
            raise ConfigurationError("num_packets must not be negative, got %r" % self.num_packets)
        if not 0 <= self.seed < 1 << 64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer, got %r" % self.seed)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> SyntheticSpec:
        """
        Build a spec from its document form.

        :raises TraceFormatError: If the document is incomplete or a value is out of range
        """
        try:
            return cls(
                num_packets=int(doc['num_packets']),
                size_model=SizeModel.from_dict(doc['size_model']),
                flow_model=FlowModel.from_dict(doc['flow_model']),
                seed=int(doc.get('seed', 0)),
            )
        except KeyError as e:
            raise TraceFormatError("Synthetic spec is missing %s" % e) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise TraceFormatError("Malformed synthetic spec: %s" % e) from e

    def to_dict(self) -> dict[str, Any]:
        return {
            'num_packets': self.num_packets,
            'seed': self.seed,
            'size_model': self.size_model.to_dict(),
            'flow_model': self.flow_model.to_dict(),
        }


@lru_cache(maxsize=1 << 16)
def _flow_fields(flow_id: int) -> dict[str, Any]:
    return dict(
        ip_version=IPVersion.V4,
        src_addr=0x0A000000 | (flow_id & 0xFFFFFF),
        dst_addr=_DST_ADDR,
        proto=TCP,
        src_port=1000 + flow_id % 60000,
        dst_port=80,
    )


def flow_record(flow_id: int, wire_len: int) -> PacketRecord:
    """The record of a ``wire_len`` byte packet of flow ``flow_id``."""
    return PacketRecord(wire_len=wire_len, **_flow_fields(flow_id))


def generate_synthetic(spec: SyntheticSpec) -> Iterator[PacketRecord]:
    """
    Generate the packets described by ``spec``.

    Sizes and flows are drawn in chunks from ``numpy.random.default_rng(spec.seed)``,
    so the result only depends on the spec.

    :param spec: The trace description
    :return: A generator of ``spec.num_packets`` records
    """
    rng = np.random.default_rng(spec.seed)
    for start in range(0, spec.num_packets, CHUNK):
        count = min(CHUNK, spec.num_packets - start)
        sizes = spec.size_model.sample(rng, count)
        flows = spec.flow_model.sample(rng, start, count)
        for size, flow_id in zip(sizes.tolist(), flows.tolist()):
            yield flow_record(flow_id, size)


class SyntheticTrace(TraceSource):
    """A trace generated on the fly from a :class:`SyntheticSpec`."""

    spec: SyntheticSpec

    def __init__(self, spec: SyntheticSpec, name: str | None = None) -> None:
        self.spec = spec
        self.name = name or f"synthetic-{spec.seed}"

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> SyntheticTrace:
        """Load a spec document (JSON or YAML)."""
        path = Path(path)
        if not path.is_file():
            raise TraceError("Synthetic spec not found: %s" % path)
        try:
            doc = yaml.safe_load(path.read_text(encoding='utf-8'))
        except yaml.YAMLError as e:
            raise TraceFormatError("%s: %s" % (path, e)) from e
        if not isinstance(doc, dict):
            raise TraceFormatError("%s: a synthetic spec must be a mapping" % path)
        return cls(SyntheticSpec.from_dict(doc), name=path.stem)

    def records(self) -> Iterator[PacketRecord]:
        logger.debug("Generating %d packets from %s", self.spec.num_packets, self.spec)
        return generate_synthetic(self.spec)
