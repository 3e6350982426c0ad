from __future__ import annotations

from typing import Callable, Sequence

import pytest

from pipelock.flow import FlowKeyMode, HashParams, dispatch, extract_key
from pipelock.pipeline import PipelineConfig, build_headers
from pipelock.trace import ClockedHeader
from pipelock.trace.synthetic import SyntheticSpec, constant, flow_record, single_flow, zipf, bimodal

from .packets import pcap_bytes


def flow_hash(flow_id: int, q: int, w_bits: int, key_mode: FlowKeyMode = FlowKeyMode.FIVE_TUPLE) -> tuple[int, int]:
    return dispatch(extract_key(flow_record(flow_id, 64), key_mode), q, w_bits, HashParams())


@pytest.fixture
def headers() -> Callable[..., list[ClockedHeader]]:
    """Build dispatched headers for a sequence of synthetic flow ids."""
    def build(
            flow_ids: Sequence[int],
            config: PipelineConfig = PipelineConfig(),
            sizes: int | Sequence[int] = 64,
            key_mode: FlowKeyMode = FlowKeyMode.FIVE_TUPLE,
    ) -> list[ClockedHeader]:
        if isinstance(sizes, int):
            sizes = [sizes] * len(flow_ids)
        records = [flow_record(f, s) for f, s in zip(flow_ids, sizes)]
        return build_headers(records, key_mode, config)

    return build


@pytest.fixture
def distinct_flows() -> Callable[[int, int], list[int]]:
    """Find ``k`` synthetic flows whose compressed keys differ."""
    def find(k: int, w_bits: int) -> list[int]:
        flows, seen = [], set()
        flow_id = 0
        while len(flows) < k:
            _, w = flow_hash(flow_id, 1, w_bits)
            if w not in seen:
                seen.add(w)
                flows.append(flow_id)
            flow_id += 1
        return flows

    return find


@pytest.fixture
def colliding_flows() -> Callable[[int, int], list[int]]:
    """Find ``k`` synthetic flows that share one compressed key."""
    def find(k: int, w_bits: int) -> list[int]:
        by_w: dict[int, list[int]] = {}
        flow_id = 0
        while True:
            _, w = flow_hash(flow_id, 1, w_bits)
            by_w.setdefault(w, []).append(flow_id)
            if len(by_w[w]) == k:
                return by_w[w]
            flow_id += 1

    return find


@pytest.fixture
def write_pcap(tmp_path):
    def write(frames, name: str = 'trace.pcap', **kwargs):
        path = tmp_path / name
        path.write_bytes(pcap_bytes(frames, **kwargs))
        return path

    return write


@pytest.fixture
def single_flow_spec() -> Callable[[int, int], SyntheticSpec]:
    def make(num_packets: int, size: int = 64) -> SyntheticSpec:
        return SyntheticSpec(num_packets=num_packets, size_model=constant(size), flow_model=single_flow())

    return make


@pytest.fixture
def mixed_spec() -> Callable[..., SyntheticSpec]:
    """Mostly minimum sized packets over a skewed set of flows."""
    def make(num_packets: int, seed: int = 0, num_flows: int = 32) -> SyntheticSpec:
        return SyntheticSpec(
            num_packets=num_packets,
            size_model=bimodal(0.8, 64, 1500),
            flow_model=zipf(num_flows, 1.0),
            seed=seed,
        )

    return make
