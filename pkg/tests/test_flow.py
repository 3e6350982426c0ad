from __future__ import annotations

import ipaddress
import random

import pytest

from pipelock import IPVersion, PacketRecord
from pipelock.exceptions import ConfigurationError
from pipelock.flow import FlowKeyMode, HashParams, crc16, dispatch, extract_key
from pipelock.flow.crc import Crc16, presets

CHECK_INPUT = b"123456789"


def reflect(value: int, width: int) -> int:
    return int(format(value, f'0{width}b')[::-1], 2)


def bitwise_crc16(data: bytes, params: HashParams) -> int:
    crc = params.init
    for byte in data:
        if params.reflect_in:
            byte = reflect(byte, 8)
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ params.polynomial) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    if params.reflect_out:
        crc = reflect(crc, 16)
    return crc ^ params.final_xor


@pytest.mark.parametrize("name", sorted(presets()))
def test_check_values(name):
    params = HashParams.preset(name)
    assert crc16(CHECK_INPUT, params) == presets()[name]['check']
    assert bitwise_crc16(CHECK_INPUT, params) == presets()[name]['check']


def test_table_matches_bitwise_reference():
    rng = random.Random(4)
    for name in presets():
        calculator = Crc16(HashParams.preset(name))
        for length in (0, 1, 2, 13, 37):
            data = bytes(rng.randrange(256) for _ in range(length))
            assert calculator.compute(data) == bitwise_crc16(data, calculator.params)


def test_default_is_ccitt_false():
    assert HashParams() == HashParams.preset('CRC-16/CCITT-FALSE')
    assert crc16(CHECK_INPUT) == 0x29B1


def test_hash_params_config():
    assert HashParams.from_config(None) == HashParams()
    assert HashParams.from_config('crc-16/xmodem').init == 0
    assert HashParams.from_config({'polynomial': 0x8005, 'init': 0}).polynomial == 0x8005
    with pytest.raises(ConfigurationError):
        HashParams.preset('crc-16/nope')
    with pytest.raises(ConfigurationError):
        HashParams.from_config({'poly': 1})
    with pytest.raises(ConfigurationError):
        HashParams(polynomial=0x10000)


V4 = PacketRecord(
    64, IPVersion.V4,
    int(ipaddress.IPv4Address('10.0.0.1')), int(ipaddress.IPv4Address('192.168.0.1')), 6, 1234, 80,
)
V6 = PacketRecord(
    64, IPVersion.V6,
    int(ipaddress.IPv6Address('2001:db8::1')), int(ipaddress.IPv6Address('2001:db8::2')), 17, 53, 53,
)


def test_key_serialization():
    assert extract_key(V4, FlowKeyMode.FIVE_TUPLE).bytes == bytes.fromhex('0a000001' 'c0a80001' '06' '04d2' '0050')
    assert extract_key(V4, FlowKeyMode.IPSRCDST).bytes == bytes.fromhex('0a000001c0a80001')
    assert extract_key(V4, FlowKeyMode.IPDST).bytes == bytes.fromhex('c0a80001')
    assert extract_key(V4, FlowKeyMode.IPDST16).bytes == bytes.fromhex('c0a8')
    assert extract_key(V4, FlowKeyMode.GLOBAL).bytes == b'\x00'


@pytest.mark.parametrize("mode, v4, v6, non_ip", [
    (FlowKeyMode.FIVE_TUPLE, 13, 37, 13),
    (FlowKeyMode.IPSRCDST, 8, 32, 8),
    (FlowKeyMode.IPDST, 4, 16, 4),
    (FlowKeyMode.IPDST16, 2, 2, 2),
    (FlowKeyMode.GLOBAL, 1, 1, 1),
])
def test_key_widths(mode, v4, v6, non_ip):
    assert extract_key(V4, mode).bit_length == 8 * v4
    assert len(extract_key(V6, mode).bytes) == v6
    key = extract_key(PacketRecord.non_ip(60), mode)
    assert key.bytes == bytes(non_ip)


def test_coarser_keys_merge_flows():
    other_port = PacketRecord(64, IPVersion.V4, V4.src_addr, V4.dst_addr, 6, 999, 80)
    assert extract_key(V4, FlowKeyMode.FIVE_TUPLE) != extract_key(other_port, FlowKeyMode.FIVE_TUPLE)
    assert extract_key(V4, FlowKeyMode.IPSRCDST) == extract_key(other_port, FlowKeyMode.IPSRCDST)


@pytest.mark.parametrize("text, mode", [
    ('5tuple', FlowKeyMode.FIVE_TUPLE),
    ('five_tuple', FlowKeyMode.FIVE_TUPLE),
    ('IPDST', FlowKeyMode.IPDST),
    ('ipdst/16', FlowKeyMode.IPDST16),
    ('srcdst', FlowKeyMode.IPSRCDST),
    ('global', FlowKeyMode.GLOBAL),
    (FlowKeyMode.GLOBAL, FlowKeyMode.GLOBAL),
])
def test_parse_key_mode(text, mode):
    assert FlowKeyMode.parse(text) is mode


def test_parse_unknown_key_mode():
    with pytest.raises(ConfigurationError):
        FlowKeyMode.parse('vlan')


def test_dispatch():
    key = extract_key(V4, FlowKeyMode.FIVE_TUPLE)
    h = crc16(key.bytes)
    assert dispatch(key, 4, 4) == (h % 4, h % 16)
    assert dispatch(key.bytes, 3, 16) == (h % 3, h)
    assert dispatch(key, 1, 1)[0] == 0

    xmodem = HashParams.preset('crc-16/xmodem')
    assert dispatch(key, 7, 8, xmodem) == (crc16(key.bytes, xmodem) % 7, crc16(key.bytes, xmodem) & 0xFF)

    with pytest.raises(ConfigurationError):
        dispatch(key, 0, 4)
    with pytest.raises(ConfigurationError):
        dispatch(key, 1, 17)
