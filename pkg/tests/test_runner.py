from __future__ import annotations

from dataclasses import replace

import pytest

from pipelock.exceptions import TraceError
from pipelock.flow import FlowKeyMode
from pipelock.pipeline import EventKind, PipelineConfig
from pipelock.pipeline.oracle import ReferenceOracle
from pipelock.experiment.batching import BatchingPolicy, SampledTrace
from pipelock.experiment.runner import BatchMetrics, ExperimentResult, run_experiment
from pipelock.trace.synthetic import SyntheticTrace, generate_synthetic


def metrics(index: int, received: int, served: int, latency: int) -> BatchMetrics:
    return BatchMetrics(
        batch_index=index, packets=received, partial=False, fdh=0.0, received=received, served=served,
        dropped=received - served, latency_p99_cycles=latency, latency_p99_ns=float(latency),
    )


def test_depth_one_is_line_rate(mixed_spec):
    result = run_experiment(SyntheticTrace(mixed_spec(3000)), FlowKeyMode.GLOBAL, PipelineConfig(n=1),
                            batching=BatchingPolicy(1000, 1000))
    assert len(result.batches) == 3
    assert result.min_throughput == result.pooled_throughput == 1.0
    assert result.latency_p99_cycles == 0
    assert all(batch.fdh == 0.0 for batch in result.batches)


@pytest.mark.parametrize("window, expected", [('inclusive', 1 / 5), ('exclusive', 1 / 4)])
def test_single_flow_throughput(single_flow_spec, window, expected):
    config = PipelineConfig(n=4, q=1, q_len=10, window=window)
    result = run_experiment(SyntheticTrace(single_flow_spec(20_000)), 'five_tuple', config,
                            batching=BatchingPolicy(20_000, 20_000))
    assert result.min_throughput == pytest.approx(expected, rel=0.01)
    assert result.batches[0].fdh > 0.99


def test_aggregates():
    result = ExperimentResult(trace='t', key_mode=FlowKeyMode.FIVE_TUPLE, config=PipelineConfig(clock_ghz=2.0))
    result.batches = [metrics(0, 10, 10, 3), metrics(1, 10, 5, 7), metrics(2, 20, 15, 5)]
    assert result.latency_p99_cycles == 7
    assert result.latency_ns == 3.5
    assert result.min_throughput == 0.5
    assert result.pooled_throughput == 0.75
    assert result.throughput() == 0.5
    assert result.throughput(pooled=True) == 0.75
    assert not result.partial


def test_reference_engine_gives_the_same_result(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(2000, seed=4, num_flows=10))), BatchingPolicy(500, 500))
    config = PipelineConfig(n=6, q=4, q_len=5)
    locking = run_experiment(trace, FlowKeyMode.FIVE_TUPLE, config)
    reference = run_experiment(trace, FlowKeyMode.FIVE_TUPLE, config, engine=ReferenceOracle)
    assert locking.batches == reference.batches
    assert locking.min_throughput < 1.0


def test_engines_share_the_event_interface(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(600, seed=5, num_flows=6))), BatchingPolicy(300, 300))
    config = PipelineConfig(n=5, q=2, q_len=4)
    locking = run_experiment(trace, FlowKeyMode.IPDST, config, record_events=True)
    reference = run_experiment(trace, FlowKeyMode.IPDST, config, record_events=True, engine=ReferenceOracle)
    assert locking.events == reference.events
    assert {index for index, _ in locking.events} == {0, 1}


def test_batches_are_independent(mixed_spec):
    records = list(generate_synthetic(mixed_spec(1000, seed=9, num_flows=5)))
    config = PipelineConfig(n=10, q=2, q_len=3)
    together = run_experiment(records, FlowKeyMode.FIVE_TUPLE, config, batching=BatchingPolicy(500, 500))
    for index, start in enumerate((0, 500)):
        alone = run_experiment(records[start:start + 500], FlowKeyMode.FIVE_TUPLE, config,
                               batching=BatchingPolicy(500, 500))
        assert together.batches[index] == replace(alone.batches[0], batch_index=index)


def test_events(single_flow_spec):
    result = run_experiment(SyntheticTrace(single_flow_spec(20)), FlowKeyMode.FIVE_TUPLE,
                            PipelineConfig(n=3, q_len=2), batching=BatchingPolicy(10, 10), record_events=True)
    assert {index for index, _ in result.events} == {0, 1}
    first = [event for index, event in result.events if index == 0]
    second = [event for index, event in result.events if index == 1]
    assert [(e.cycle, e.kind) for e in first] == [(e.cycle, e.kind) for e in second]
    assert first[0].cycle == 1 and first[0].kind is EventKind.ARRIVE
    assert run_experiment(SyntheticTrace(single_flow_spec(20)), FlowKeyMode.FIVE_TUPLE,
                          PipelineConfig(n=3), batching=BatchingPolicy(10, 10)).events == []


def test_empty_trace():
    with pytest.raises(TraceError):
        run_experiment([], FlowKeyMode.FIVE_TUPLE, PipelineConfig())


def test_partial_and_rows(single_flow_spec):
    config = PipelineConfig(n=2, q=4, q_len=10, w_bits=4)
    result = run_experiment(SyntheticTrace(single_flow_spec(10), name='tiny'), FlowKeyMode.IPDST, config,
                            batching=BatchingPolicy(100, 100))
    assert result.partial
    batch, = result.batch_rows()
    assert batch[:5] == ('tiny', 'ipdst', 0, 10, 1)
    assert len(batch) == 10
    assert result.summary_row() == (
        'tiny', 'ipdst', 2, 4, 10, 4, 1,
        result.min_throughput, result.pooled_throughput, result.latency_p99_cycles, result.latency_ns,
    )
