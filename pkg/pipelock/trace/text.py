"""
CSV traces.

One packet per row under the header ``wire_len,src_ip,dst_ip,proto,sport,dport``.
Addresses are written in dotted-quad or RFC 5952 form; both are left empty for non-IP packets.
"""
from __future__ import annotations

import csv
import ipaddress
import logging
import os

from pathlib import Path
from typing import Iterable, Iterator

from .. import IPVersion, PacketRecord, TCP, UDP
from ..data import atomic_open
from ..exceptions import TraceError, TraceFormatError, TraceRowError
from . import TraceSource

__all__ = [
    "CsvTrace",
    "read_csv",
    "write_csv",
    "CSV_HEADER",
]

logger = logging.getLogger(__name__)

CSV_HEADER = ('wire_len', 'src_ip', 'dst_ip', 'proto', 'sport', 'dport')


def _parse_int(text: str, field: str, upper: int, line: int) -> int:
    try:
        value = int(text.strip() or 0)
    except ValueError as e:
        raise TraceRowError(line, "%s is not a number: %r" % (field, text)) from e
    if not 0 <= value <= upper:
        raise TraceRowError(line, "%s out of range: %d" % (field, value))
    return value


def _parse_address(text: str, field: str, line: int) -> ipaddress.IPv4Address | ipaddress.IPv6Address:
    try:
        return ipaddress.ip_address(text.strip())
    except ValueError as e:
        raise TraceRowError(line, "%s is not an IP address: %r" % (field, text)) from e


def parse_row(row: list[str], line: int) -> PacketRecord:
    """
    Turn one CSV row into a record.

    :param row: The fields of the row
    :param line: The line number, for error messages
    :return: The record
    :raises TraceRowError: If the row can not be parsed
    """
    if len(row) != len(CSV_HEADER):
        raise TraceRowError(line, "expected %d fields, got %d" % (len(CSV_HEADER), len(row)))
    wire_len_text, src_text, dst_text, proto_text, sport_text, dport_text = row

    try:
        wire_len = int(wire_len_text)
    except ValueError as e:
        raise TraceRowError(line, "wire_len is not a number: %r" % wire_len_text) from e
    if wire_len < 1:
        raise TraceRowError(line, "wire_len must be positive, got %d" % wire_len)

    if not src_text.strip() and not dst_text.strip():
        return PacketRecord.non_ip(wire_len)
    if not src_text.strip() or not dst_text.strip():
        raise TraceRowError(line, "either both or none of src_ip and dst_ip must be given")

    src = _parse_address(src_text, 'src_ip', line)
    dst = _parse_address(dst_text, 'dst_ip', line)
    if src.version != dst.version:
        raise TraceRowError(line, "src_ip and dst_ip have different IP versions")

    proto = _parse_int(proto_text, 'proto', 0xFF, line)
    sport = _parse_int(sport_text, 'sport', 0xFFFF, line)
    dport = _parse_int(dport_text, 'dport', 0xFFFF, line)
    if proto not in (TCP, UDP):
        sport = dport = 0

    return PacketRecord(
        wire_len=wire_len,
        ip_version=IPVersion.V4 if src.version == 4 else IPVersion.V6,
        src_addr=int(src),
        dst_addr=int(dst),
        proto=proto,
        src_port=sport,
        dst_port=dport,
    )


def format_row(record: PacketRecord) -> tuple:
    """The CSV fields of a record, the inverse of :func:`parse_row`."""
    if not record.is_ip:
        return record.wire_len, '', '', 0, 0, 0
    address = ipaddress.IPv4Address if record.ip_version is IPVersion.V4 else ipaddress.IPv6Address
    return (
        record.wire_len,
        str(address(record.src_addr)),
        str(address(record.dst_addr)),
        record.proto,
        record.src_port,
        record.dst_port,
    )


class CsvTrace(TraceSource):
    """A trace stored as CSV.

    In strict mode the first unparsable row aborts the iteration with a
    :class:`pipelock.exceptions.TraceRowError`, in lenient mode such rows are skipped and counted.
    """

    path: Path
    strict: bool
    skipped: int
    """The number of rows skipped during the last iteration (lenient mode only)"""

    def __init__(self, path: str | os.PathLike, strict: bool = True) -> None:
        self.path = Path(path)
        self.name = self.path.stem
        self.strict = strict
        self.skipped = 0

    def open(self) -> None:
        if not self.path.is_file():
            raise TraceError("Trace file not found: %s" % self.path)

    def records(self) -> Iterator[PacketRecord]:
        self.skipped = 0
        with self.path.open('r', encoding='utf-8', newline='') as fp:
            reader = csv.reader(fp)
            header = next(reader, None)
            if header is None or tuple(field.strip() for field in header) != CSV_HEADER:
                raise TraceFormatError("%s: expected the header %s" % (self.path, ','.join(CSV_HEADER)))
            for row in reader:
                if not row:
                    continue
                try:
                    yield parse_row(row, reader.line_num)
                except TraceRowError as e:
                    if self.strict:
                        raise
                    self.skipped += 1
                    logger.debug("%s: skipping %s", self.path, e)

        if self.skipped:
            logger.warning("%s: skipped %d unparsable rows", self.path, self.skipped)


def read_csv(path: str | os.PathLike, strict: bool = True) -> Iterator[PacketRecord]:
    """
    Read the packets of a CSV trace in row order.

    :param path: The CSV file
    :param strict: Abort on the first bad row instead of skipping it
    :return: A generator of packet records
    """
    with CsvTrace(path, strict=strict) as trace:
        yield from trace


def write_csv(records: Iterable[PacketRecord], path: str | os.PathLike) -> int:
    """
    Write packets as a CSV trace that :func:`read_csv` reads back unchanged.

    :param records: The packets
    :param path: The destination file, replaced atomically
    :return: The number of packets written
    """
    count = 0
    with atomic_open(path) as fp:
        writer = csv.writer(fp, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(format_row(record))
            count += 1
    return count
