"""
CRC-16 with configurable parameters, used to hash flow keys.
"""
from __future__ import annotations

import logging

from dataclasses import dataclass, asdict
from functools import lru_cache
from pathlib import Path
from typing import Any

import yaml

from ..exceptions import ConfigurationError

__all__ = [
    "HashParams",
    "Crc16",
    "crc16",
    "presets",
]

logger = logging.getLogger(__name__)

DEFAULT_PRESET = 'crc-16/ccitt-false'


@lru_cache
def presets() -> dict[str, dict[str, Any]]:
    """The named CRC-16 variants shipped in ``hashes.yaml``, including their check values."""
    return yaml.safe_load((Path(__file__).parent / 'hashes.yaml').read_text(encoding='utf-8'))['presets']


@dataclass(frozen=True)
class HashParams(object):
    """Parameters of a CRC-16 in the usual (Rocksoft) model. The defaults are CRC-16/CCITT-FALSE."""

    polynomial: int = 0x1021
    """The generator polynomial without the implicit x^16 term"""
    init: int = 0xFFFF
    """The initial register value"""
    reflect_in: bool = False
    """Whether every input byte is processed least significant bit first"""
    reflect_out: bool = False
    """Whether the register is bit-reversed before the final XOR"""
    final_xor: int = 0x0000
    """The value XORed onto the result"""

    def __post_init__(self) -> None:
        for name in ('polynomial', 'init', 'final_xor'):
            value = getattr(self, name)
            if not 0 <= value <= 0xFFFF:
                raise ConfigurationError("%s must be a 16-bit value, got %r" % (name, value))

    @classmethod
    def preset(cls, name: str) -> HashParams:
        """Get the parameters of a named variant, e.g. ``crc-16/xmodem``."""
        try:
            params = dict(presets()[name.lower()])
        except KeyError as e:
            raise ConfigurationError(
                "Unknown CRC preset %r, choose one of %s" % (name, ', '.join(sorted(presets())))
            ) from e
        params.pop('check', None)
        return cls(**params)

    @classmethod
    def from_config(cls, value: str | dict[str, Any] | None) -> HashParams:
        """Build parameters from a preset name, a mapping of fields, or ``None`` for the default."""
        if value is None:
            return cls()
        if isinstance(value, str):
            return cls.preset(value)
        try:
            return cls(**value)
        except TypeError as e:
            raise ConfigurationError("Invalid hash parameters: %s" % e) from e

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _reflect(value: int, width: int) -> int:
    result = 0
    for _ in range(width):
        result = (result << 1) | (value & 1)
        value >>= 1
    return result


class Crc16(object):
    """Table driven CRC-16 calculator for one set of :class:`HashParams`."""

    params: HashParams
    _table: tuple[int, ...]
    _reflected_bytes: tuple[int, ...] | None

    def __init__(self, params: HashParams = HashParams()) -> None:
        self.params = params
        self._table = tuple(self._table_entry(byte) for byte in range(256))
        self._reflected_bytes = tuple(_reflect(b, 8) for b in range(256)) if params.reflect_in else None

    def _table_entry(self, byte: int) -> int:
        crc = byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ self.params.polynomial) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
        return crc

    def compute(self, data: bytes) -> int:
        """Compute the CRC of ``data``."""
        table = self._table
        crc = self.params.init
        if self._reflected_bytes is not None:
            data = bytes(self._reflected_bytes[b] for b in data)
        for b in data:
            crc = ((crc << 8) & 0xFFFF) ^ table[(crc >> 8) ^ b]
        if self.params.reflect_out:
            crc = _reflect(crc, 16)
        return crc ^ self.params.final_xor

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} poly=0x{self.params.polynomial:04X}>"


@lru_cache(maxsize=None)
def _calculator(params: HashParams) -> Crc16:
    return Crc16(params)


def crc16(data: bytes, params: HashParams = HashParams()) -> int:
    """
    Compute a CRC-16 of ``data``.

    :param data: The bytes to hash
    :param params: The CRC variant, CRC-16/CCITT-FALSE by default
    :return: The 16-bit CRC
    """
    return _calculator(params).compute(data)
