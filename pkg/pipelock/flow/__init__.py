"""
Flow keys and dispatch

A flow key (FK) names the state cell a packet reads and writes.
Keys can be built at different aggregation levels, from the 5-tuple down to a single global cell.
The dispatcher hashes the key once and derives from the hash

- the index of the queue the header waits in: ``q = hash(FK) mod Q``
- the compressed key the scheduler compares: ``w = hash(FK) mod 2^W``

---

Contains the following modules:

- ``pipelock.flow.crc`` - CRC-16 used as ``hash()``

---
"""
from __future__ import annotations

import logging

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .. import IPVersion, PacketRecord
from ..exceptions import ConfigurationError
from .crc import HashParams, crc16

logger = logging.getLogger(__name__)

__all__ = [
    "crc",
    "FlowKeyMode",
    "FlowKey",
    "HashParams",
    "extract_key",
    "dispatch",
    "crc16",
]


class FlowKeyMode(str, Enum):
    """Aggregation level of the flow key, from finest to coarsest."""

    FIVE_TUPLE = 'five_tuple'
    IPSRCDST = 'ipsrcdst'
    IPDST = 'ipdst'
    IPDST16 = 'ipdst16'
    GLOBAL = 'global'

    @classmethod
    def parse(cls, value: str | FlowKeyMode) -> FlowKeyMode:
        """Accept the enum value or one of the command line spellings (``5tuple``, ``ipdst/16``, ...)."""
        if isinstance(value, FlowKeyMode):
            return value
        name = str(value).strip().lower().replace('-', '_').replace('/', '')
        try:
            return cls(_ALIASES.get(name, name))
        except ValueError as e:
            raise ConfigurationError(
                "Unknown flow key mode %r, choose one of %s" % (value, ', '.join(m.value for m in cls))
            ) from e

    @property
    def label(self) -> str:
        """Short name used in output files."""
        return _LABELS[self]

    def zero_key(self) -> bytes:
        """The reserved key of non-IP packets: all zero bytes, in the IPv4 width of this mode."""
        return bytes(_IPV4_WIDTH[self])


_ALIASES = {
    '5tuple': 'five_tuple',
    '5_tuple': 'five_tuple',
    'srcdst': 'ipsrcdst',
}
_LABELS = {
    FlowKeyMode.FIVE_TUPLE: '5tuple',
    FlowKeyMode.IPSRCDST: 'ipsrcdst',
    FlowKeyMode.IPDST: 'ipdst',
    FlowKeyMode.IPDST16: 'ipdst16',
    FlowKeyMode.GLOBAL: 'global',
}
_IPV4_WIDTH = {
    FlowKeyMode.FIVE_TUPLE: 13,
    FlowKeyMode.IPSRCDST: 8,
    FlowKeyMode.IPDST: 4,
    FlowKeyMode.IPDST16: 2,
    FlowKeyMode.GLOBAL: 1,
}
_GLOBAL_KEY = b'\x00'


@dataclass(frozen=True)
class FlowKey(object):
    """A canonical serialization of the header fields selected by ``mode``, in network byte order."""

    mode: FlowKeyMode
    """The aggregation level the key was built with"""
    bytes: bytes
    """The key itself, equal bytes mean the same state cell"""

    @property
    def bit_length(self) -> int:
        """FK_len of this key."""
        return 8 * len(self.bytes)

    def __str__(self) -> str:
        return f"{self.mode.label}:{self.bytes.hex()}"


def _key_bytes(record: PacketRecord, mode: FlowKeyMode) -> bytes:
    if mode is FlowKeyMode.GLOBAL:
        return _GLOBAL_KEY
    if record.ip_version is IPVersion.NON_IP:
        return mode.zero_key()

    width = record.ip_version.address_bytes
    dst = record.dst_addr.to_bytes(width, 'big')
    if mode is FlowKeyMode.IPDST16:
        return dst[:2]
    if mode is FlowKeyMode.IPDST:
        return dst
    src = record.src_addr.to_bytes(width, 'big')
    if mode is FlowKeyMode.IPSRCDST:
        return src + dst
    return (
        src + dst
        + record.proto.to_bytes(1, 'big')
        + record.src_port.to_bytes(2, 'big')
        + record.dst_port.to_bytes(2, 'big')
    )


def extract_key(record: PacketRecord, mode: FlowKeyMode) -> FlowKey:
    """
    Build the flow key of ``record``.

    Serializations (all fields big endian):

    - ``five_tuple``: src_addr, dst_addr, proto, src_port, dst_port (13 bytes for IPv4, 37 for IPv6)
    - ``ipsrcdst``: src_addr, dst_addr (8 or 32 bytes)
    - ``ipdst``: dst_addr (4 or 16 bytes)
    - ``ipdst16``: the first 2 bytes of dst_addr
    - ``global``: the single byte ``0x00``

    Non-IP packets get the all-zero key of the mode's IPv4 width.

    :param record: The packet
    :param mode: The aggregation level
    :return: The flow key
    """
    return FlowKey(mode=mode, bytes=_key_bytes(record, mode))


@lru_cache(maxsize=1 << 16)
def _hash(key: bytes, params: HashParams) -> int:
    return crc16(key, params)


def dispatch(key: FlowKey | bytes, q: int, w_bits: int, params: HashParams = HashParams()) -> tuple[int, int]:
    """
    Compute the queue index and the compressed scheduler key of a flow key.

    One hash evaluation feeds both values: ``q = h mod Q`` and ``w = h mod 2^W``.

    :param key: The flow key (or its bytes)
    :param q: The number of queues Q
    :param w_bits: The width W of the compressed key in bits
    :param params: The CRC variant used as hash
    :return: ``(queue_index, w)``
    """
    if q < 1:
        raise ConfigurationError("Q must be at least 1, got %r" % q)
    if not 1 <= w_bits <= 16:
        raise ConfigurationError("W must be between 1 and 16 bits, got %r" % w_bits)
    h = _hash(key.bytes if isinstance(key, FlowKey) else key, params)
    return h % q, h & ((1 << w_bits) - 1)
