"""
.. include:: ../README.md

---
"""
from __future__ import annotations

import logging

from dataclasses import dataclass
from enum import Enum

from .exceptions import TraceError

logger = logging.getLogger(__name__)

__all__ = [
    "cli",
    "config",
    "data",
    "exceptions",
    "experiment",
    "flow",
    "mixins",
    "pipeline",
    "protocols",
    "trace",
    "units",
    "IPVersion",
    "PacketRecord",
]

TCP = 6
UDP = 17


class IPVersion(str, Enum):
    """The network layer of a packet as far as the simulator cares."""

    V4 = 'v4'
    V6 = 'v6'
    NON_IP = 'non_ip'

    @property
    def address_bytes(self) -> int:
        """Width of an address of this version in bytes; non-IP packets use the IPv4 width."""
        return 16 if self is IPVersion.V6 else 4


@dataclass(frozen=True)
class PacketRecord(object):
    """
    One packet of a trace: its on-wire length and the header fields a flow key can be built from.

    Addresses are stored as integers, IPv4 addresses zero-extended to 128 bits.
    """

    wire_len: int
    """The on-wire length in bytes (the original length of a pcap record, not the snapped length)"""
    ip_version: IPVersion = IPVersion.NON_IP
    """The IP version, or ``non_ip``"""
    src_addr: int = 0
    """The source address"""
    dst_addr: int = 0
    """The destination address"""
    proto: int = 0
    """The IP protocol number (next header for IPv6)"""
    src_port: int = 0
    """The TCP/UDP source port, 0 for other protocols"""
    dst_port: int = 0
    """The TCP/UDP destination port, 0 for other protocols"""

    def __post_init__(self) -> None:
        if self.wire_len < 1:
            raise TraceError("wire_len must be at least 1 byte, got %r" % self.wire_len)
        if self.ip_version is IPVersion.NON_IP and any(
                (self.src_addr, self.dst_addr, self.proto, self.src_port, self.dst_port)
        ):
            raise TraceError("Non-IP packets can not carry addresses, protocol or ports")
        limit = 1 << 8 * self.ip_version.address_bytes
        for name, address in (('src_addr', self.src_addr), ('dst_addr', self.dst_addr)):
            if not 0 <= address < limit:
                raise TraceError("%s %r does not fit an %s address" % (name, address, self.ip_version.value))
        if not 0 <= self.proto <= 0xFF:
            raise TraceError("proto must be between 0 and 255, got %r" % self.proto)
        if not (0 <= self.src_port <= 0xFFFF and 0 <= self.dst_port <= 0xFFFF):
            raise TraceError("Ports must be between 0 and 65535, got %r and %r" % (self.src_port, self.dst_port))
        if self.proto not in (TCP, UDP) and (self.src_port or self.dst_port):
            raise TraceError("Only TCP and UDP packets have ports, got protocol %d" % self.proto)

    def __str__(self) -> str:
        if self.ip_version is IPVersion.NON_IP:
            return f"<non-ip {self.wire_len}B>"
        return (
            f"<{self.ip_version.value} {self.wire_len}B {self.src_addr:x}:{self.src_port}"
            f" -> {self.dst_addr:x}:{self.dst_port} proto {self.proto}>"
        )

    @classmethod
    def non_ip(cls, wire_len: int) -> PacketRecord:
        """A record for a packet without (a parsable) IP header."""
        return cls(wire_len=wire_len)

    @property
    def is_ip(self) -> bool:
        """Whether the packet carries an IP header."""
        return self.ip_version is not IPVersion.NON_IP
