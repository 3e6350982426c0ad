from __future__ import annotations

from collections import defaultdict

import pytest

from pipelock.exceptions import HazardInvariantError
from pipelock.flow import FlowKeyMode
from pipelock.pipeline import Event, EventKind, PipelineConfig, SimOutcome, build_headers
from pipelock.pipeline.locking import InFlightSet, LockingPipeline, run_locking_batch
from pipelock.trace.synthetic import generate_synthetic

A, D, E, X = EventKind.ARRIVE, EventKind.ADMIT, EventKind.EXPIRE, EventKind.DROP


def test_in_flight_set():
    in_flight = InFlightSet(lifetime=2)
    assert in_flight.next_expiry() is None
    in_flight.add(5, 1, queue=3)
    in_flight.add(6, 2)
    assert 5 in in_flight and 6 in in_flight
    assert list(in_flight) == [5, 6]
    assert in_flight.next_expiry() == 4
    assert in_flight.expire(3) == []
    assert in_flight.expire(4) == [(5, 1, 3)]
    assert 5 not in in_flight
    assert len(in_flight) == 1
    assert in_flight.expire(100) == [(6, 2, 0)]


def test_empty_batch():
    assert run_locking_batch([], PipelineConfig(n=4)) == SimOutcome()


def test_single_packet(headers):
    outcome = run_locking_batch(headers([0], sizes=1500), PipelineConfig(n=8))
    assert (outcome.received, outcome.served, outcome.dropped) == (1, 1, 0)
    assert outcome.latencies == [0]
    assert outcome.cycles_elapsed == 19


def test_single_flow_by_hand(headers):
    config = PipelineConfig(n=2, q=1, q_len=1)
    engine = LockingPipeline(config, record_events=True)
    outcome = engine.run_batch(headers([0] * 5, config))
    assert (outcome.served, outcome.dropped) == (3, 2)
    assert outcome.latencies == [0, 2, 2]
    assert outcome.cycles_elapsed == 7
    assert [(e.cycle, e.kind) for e in engine.events] == [
        (1, A), (1, D), (2, A), (3, X), (4, E), (4, X), (4, D), (5, A), (7, E), (7, D),
    ]


def test_single_flow_by_hand_exclusive(headers):
    config = PipelineConfig(n=2, q=1, q_len=1, window='exclusive')
    outcome = run_locking_batch(headers([0] * 5, config), config)
    assert (outcome.served, outcome.dropped) == (3, 2)
    assert outcome.latencies == [0, 1, 1]
    assert outcome.cycles_elapsed == 5


@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_depth_one_never_blocks_and_others_stall(headers, n):
    config = PipelineConfig(n=n, q=4, q_len=10)
    batch = headers([0, 1, 2, 3] * 50, config)
    outcome = run_locking_batch(batch, config)
    assert outcome.received == outcome.served + outcome.dropped
    if n == 1:
        assert outcome.dropped == 0
        assert set(outcome.latencies) == {0}
        assert outcome.cycles_elapsed == 200


@pytest.mark.parametrize("n, window, expected", [
    (2, 'inclusive', 1 / 3),
    (4, 'inclusive', 1 / 5),
    (8, 'inclusive', 1 / 9),
    (2, 'exclusive', 1 / 2),
    (4, 'exclusive', 1 / 4),
    (8, 'exclusive', 1 / 8),
])
def test_single_flow_throughput(headers, n, window, expected):
    config = PipelineConfig(n=n, q=1, q_len=10, window=window)
    outcome = run_locking_batch(headers([0] * 100_000, config), config)
    assert outcome.throughput == pytest.approx(expected, rel=0.01)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_enough_flows_sustain_line_rate(headers, distinct_flows, n):
    inclusive = PipelineConfig(n=n, q=n, q_len=10)
    flows = distinct_flows(n + 1, inclusive.w_bits)
    outcome = run_locking_batch(headers(flows * 2000, inclusive), inclusive)
    assert (outcome.dropped, outcome.throughput) == (0, 1.0)
    assert set(outcome.latencies) == {0}

    exclusive = PipelineConfig(n=n, q=n, q_len=10, window='exclusive')
    flows = distinct_flows(n, exclusive.w_bits)
    outcome = run_locking_batch(headers(flows * 2000, exclusive), exclusive)
    assert (outcome.dropped, outcome.throughput) == (0, 1.0)
    assert set(outcome.latencies) == {0}


def test_n_flows_with_deep_queues(headers, distinct_flows):
    config = PipelineConfig(n=4, q=4, q_len=1000)
    flows = distinct_flows(4, config.w_bits)
    outcome = run_locking_batch(headers(flows * 250, config), config)
    assert (outcome.dropped, outcome.throughput) == (0, 1.0)
    assert max(outcome.latencies) > 0


def test_colliding_flows_behave_like_one(headers, colliding_flows):
    config = PipelineConfig(n=2, q=1, q_len=10, w_bits=2)
    a, b = colliding_flows(2, config.w_bits)
    colliding = run_locking_batch(headers([a, b] * 5000, config), config)
    single = run_locking_batch(headers([a] * 10_000, config), config)
    assert colliding == single
    assert colliding.throughput == pytest.approx(1 / 3, rel=0.01)


def test_per_queue_order_and_safety(mixed_spec):
    for n, q, q_len in [(3, 4, 5), (8, 8, 20), (16, 2, 100)]:
        config = PipelineConfig(n=n, q=q, q_len=q_len, w_bits=4)
        batch = build_headers(generate_synthetic(mixed_spec(2000, seed=n)), FlowKeyMode.FIVE_TUPLE, config)
        engine = LockingPipeline(config, record_events=True)
        outcome = engine.run_batch(batch)
        assert outcome.received == outcome.served + outcome.dropped == 2000

        arrived, admitted = defaultdict(list), defaultdict(list)
        admissions_per_cycle = defaultdict(int)
        last_admit: dict[int, int] = {}
        for event in engine.events:
            if event.kind is EventKind.ARRIVE:
                arrived[event.queue].append(event.w)
            elif event.kind is EventKind.ADMIT:
                admitted[event.queue].append(event.w)
                admissions_per_cycle[event.cycle] += 1
                if event.w in last_admit:
                    assert event.cycle - last_admit[event.w] > config.lifetime
                last_admit[event.w] = event.cycle
        assert arrived == admitted
        assert set(admissions_per_cycle.values()) == {1}
        assert [e.cycle for e in engine.events] == sorted(e.cycle for e in engine.events)


def test_larger_queues_serve_more(mixed_spec):
    records = list(generate_synthetic(mixed_spec(10_000, seed=11, num_flows=8)))
    dispatched = PipelineConfig(q=4)
    batches = [build_headers(records[start:start + 1000], FlowKeyMode.FIVE_TUPLE, dispatched)
               for start in range(0, 10_000, 1000)]
    for n in (4, 12, 30):
        served = []
        for q_len in (1, 100, 10_000):
            config = dispatched.replace(n=n, q_len=q_len)
            served.append(sum(run_locking_batch(batch, config).served for batch in batches))
        assert served == sorted(served)
        assert served[-1] == 10_000


def test_guard_catches_violations():
    engine = LockingPipeline(PipelineConfig(n=4))
    engine.reset_guard()
    engine.guard_admission(3, 10)
    engine.guard_admission(4, 11)
    engine.guard_admission(3, 15)
    with pytest.raises(HazardInvariantError):
        engine.guard_admission(3, 19)


def test_events_are_off_by_default(headers):
    engine = LockingPipeline(PipelineConfig(n=2))
    engine.run_batch(headers([0, 0, 0]))
    assert engine.events == []
    assert Event(1, EventKind.ADMIT, 0, 0).kind.value == 'admit'
