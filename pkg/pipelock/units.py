"""
Convert between clock cycles, time, bytes and rates

The name of a conversion function is the unit of its result,
the units it converts from are passed as keywords and added up.
"""

from __future__ import annotations

__all__ = [
    'reception_cycles',
    'nanoseconds',
    'cycles',
    'bits',
    'bytes_',
    'kilobytes',
    'gigabits_per_second',
    'ns',
    'kb',
    'gbps',
]


def reception_cycles(wire_len: int, chunk_bytes: int = 80) -> int:
    """
    Number of clock cycles needed to completely receive a packet of ``wire_len`` bytes
    when the data path reads ``chunk_bytes`` bytes per cycle.

    :param wire_len: The on-wire length of the packet in bytes
    :param chunk_bytes: The width of the data path in bytes
    :return: ``ceil(wire_len / chunk_bytes)``
    """
    return -(-wire_len // chunk_bytes)


def nanoseconds(cycles: float = 0, clock_ghz: float = 1.0) -> float:  # noqa: F402
    """Convert to nanoseconds"""
    return cycles / clock_ghz


def cycles(nanoseconds: float = 0, clock_ghz: float = 1.0) -> float:  # noqa: F402
    """Convert to clock cycles"""
    return nanoseconds * clock_ghz


def bits(bytes: float = 0, kilobytes: float = 0) -> float:  # noqa: F402
    """Convert to bits"""
    ret = 0
    if bytes:
        ret += bytes * 8
    if kilobytes:
        ret += kilobytes * 8000
    return ret


def bytes_(bits: float = 0, kilobytes: float = 0) -> float:  # noqa: F402
    """Convert to bytes"""
    ret = 0
    if bits:
        ret += bits / 8
    if kilobytes:
        ret += kilobytes * 1000
    return ret


def kilobytes(bytes: float = 0, bits: float = 0) -> float:  # noqa: F402
    """Convert to (decimal) kilobytes"""
    ret = 0
    if bytes:
        ret += bytes / 1000
    if bits:
        ret += bits / 8000
    return ret


def gigabits_per_second(chunk_bytes: int = 80, clock_ghz: float = 1.0) -> float:
    """Line rate of a data path that reads ``chunk_bytes`` per clock cycle, e.g. 80 B at 1 GHz is 640 Gb/s."""
    return bits(bytes=chunk_bytes) * clock_ghz


ns = nanoseconds
kb = kilobytes
gbps = gigabits_per_second
