"""
Reader for classic libpcap files.

Ethernet (with 802.1Q/802.1ad tags), raw IP and Linux cooked captures are decoded.
The record's ``wire_len`` is the original length of the frame, so snapped captures
still account for the full reception time of every packet.
"""
from __future__ import annotations

import logging
import os

from pathlib import Path
from typing import BinaryIO, Iterator

import dpkt
import dpkt.ethernet
import dpkt.ip
import dpkt.ip6
import dpkt.pcap
import dpkt.sll
import dpkt.tcp
import dpkt.udp

from .. import IPVersion, PacketRecord, TCP, UDP
from ..exceptions import TraceError, TraceFormatError
from . import TraceSource

__all__ = [
    "PcapTrace",
    "read_pcap",
    "decode_frame",
    "LINKTYPE_ETHERNET",
    "LINKTYPE_RAW",
    "LINKTYPE_LINUX_SLL",
]

logger = logging.getLogger(__name__)

# Magic numbers as they read when the global header is unpacked big endian
_BIG_ENDIAN_MAGIC = (0xa1b2c3d4, 0xa1b23c4d)  # micro- and nanosecond timestamps
_LITTLE_ENDIAN_MAGIC = (0xd4c3b2a1, 0x4d3cb2a1)

LINKTYPE_ETHERNET = 1
LINKTYPE_RAW = 101
LINKTYPE_LINUX_SLL = 113
_LINKTYPE_RAW_ALIASES = (12, 14, LINKTYPE_RAW)  # DLT_RAW differs between platforms
_LINKTYPE_IPV4 = 228
_LINKTYPE_IPV6 = 229


def _ip_fields(ip: dpkt.Packet) -> dict:
    """Extract the key fields from a decoded ``dpkt.ip.IP`` or ``dpkt.ip6.IP6``."""
    if isinstance(ip, dpkt.ip.IP):
        version = IPVersion.V4
        proto = ip.p
    else:
        version = IPVersion.V6
        proto = getattr(ip, 'p', ip.nxt)  # upper layer protocol after the extension headers
    fields = dict(
        ip_version=version,
        src_addr=int.from_bytes(ip.src, 'big'),
        dst_addr=int.from_bytes(ip.dst, 'big'),
        proto=proto,
    )
    transport = ip.data
    if proto in (TCP, UDP) and isinstance(transport, (dpkt.tcp.TCP, dpkt.udp.UDP)):
        fields.update(src_port=transport.sport, dst_port=transport.dport)
    return fields


def _network_layer(buf: bytes, linktype: int) -> dpkt.Packet | None:
    """Return the decoded IP layer of a frame, ``None`` if there is none or it is truncated."""
    if linktype == LINKTYPE_ETHERNET:
        layer = dpkt.ethernet.Ethernet(buf).data
    elif linktype == LINKTYPE_LINUX_SLL:
        layer = dpkt.sll.SLL(buf).data
    elif linktype in _LINKTYPE_RAW_ALIASES or linktype in (_LINKTYPE_IPV4, _LINKTYPE_IPV6):
        if not buf:
            return None
        version = buf[0] >> 4
        if version == 4:
            layer = dpkt.ip.IP(buf)
        elif version == 6:
            layer = dpkt.ip6.IP6(buf)
        else:
            return None
    else:
        return None
    return layer if isinstance(layer, (dpkt.ip.IP, dpkt.ip6.IP6)) else None


def decode_frame(buf: bytes, wire_len: int, linktype: int = LINKTYPE_ETHERNET) -> PacketRecord:
    """
    Decode one captured frame into a :class:`pipelock.PacketRecord`.

    Frames without an IP header, or whose IP header is cut off by the snapshot length,
    become non-IP records. Ports are only filled in if the transport header could be parsed.

    :param buf: The captured bytes
    :param wire_len: The original length of the frame on the wire
    :param linktype: The link type of the capture
    :return: The record
    """
    try:
        ip = _network_layer(buf, linktype)
    except (dpkt.UnpackError, IndexError, ValueError):
        ip = None
    if ip is None:
        return PacketRecord.non_ip(wire_len)
    return PacketRecord(wire_len=wire_len, **_ip_fields(ip))


class PcapTrace(TraceSource):
    """A trace stored in a classic libpcap file (not pcapng)."""

    path: Path
    truncated: int
    """The number of records cut off at the end of the file during the last iteration"""

    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)
        self.name = self.path.stem
        self.truncated = 0

    def open(self) -> None:
        if not self.path.is_file():
            raise TraceError("Trace file not found: %s" % self.path)
        with self.path.open('rb') as fp:
            self._read_global_header(fp)

    def _read_global_header(self, fp: BinaryIO) -> tuple[type[dpkt.Packet], int]:
        """Validate the global header and return the record header class and the link type."""
        buf = fp.read(dpkt.pcap.FileHdr.__hdr_len__)
        try:
            header = dpkt.pcap.FileHdr(buf)
        except dpkt.UnpackError as e:
            raise TraceFormatError("%s: truncated pcap global header" % self.path) from e

        if header.magic in _BIG_ENDIAN_MAGIC:
            return dpkt.pcap.PktHdr, header.linktype
        if header.magic in _LITTLE_ENDIAN_MAGIC:
            return dpkt.pcap.LEPktHdr, dpkt.pcap.LEFileHdr(buf).linktype
        raise TraceFormatError("%s: not a libpcap file (magic 0x%08x)" % (self.path, header.magic))

    def records(self) -> Iterator[PacketRecord]:
        self.truncated = 0
        with self.path.open('rb') as fp:
            record_header, linktype = self._read_global_header(fp)
            if linktype not in (LINKTYPE_ETHERNET, LINKTYPE_LINUX_SLL, _LINKTYPE_IPV4, _LINKTYPE_IPV6) \
                    and linktype not in _LINKTYPE_RAW_ALIASES:
                logger.warning("%s: unsupported link type %d, all packets are treated as non-IP",
                               self.path, linktype)

            header_len = record_header.__hdr_len__
            while True:
                buf = fp.read(header_len)
                if not buf:
                    break
                if len(buf) < header_len:
                    self.truncated += 1
                    break
                header = record_header(buf)
                frame = fp.read(header.caplen)
                if len(frame) < header.caplen:
                    self.truncated += 1
                    break
                yield decode_frame(frame, max(header.len, len(frame), 1), linktype)

        if self.truncated:
            logger.warning("%s: the file ends inside a packet record (%d truncated)", self.path, self.truncated)


def read_pcap(path: str | os.PathLike) -> Iterator[PacketRecord]:
    """
    Read all packets of a libpcap file, in file order.

    :param path: The pcap file
    :return: A generator of packet records
    :raises TraceFormatError: If the global header is malformed
    """
    with PcapTrace(path) as trace:
        yield from trace
