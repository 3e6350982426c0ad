from __future__ import annotations

import pytest

from pipelock.exceptions import ConfigurationError
from pipelock.flow import FlowKeyMode
from pipelock.pipeline import PipelineConfig
from pipelock.experiment.batching import BatchingPolicy, SampledTrace
from pipelock.experiment.budget import budget_curve, budget_search, budget_table, select_budget
from pipelock.experiment.runner import run_experiment
from pipelock.trace.synthetic import SyntheticTrace, flow_record, generate_synthetic

WHOLE = BatchingPolicy(batch_size=2000, batch_stride=2000)


def test_max_size_single_flow(single_flow_spec):
    entry = budget_search(SyntheticTrace(single_flow_spec(2000, 1500)), FlowKeyMode.FIVE_TUPLE, q=1, q_len=10,
                          target=1.0, batching=WHOLE, n_max=25)
    assert entry.budget_n == 18
    assert entry.latency_ns == 0.0
    assert entry.throughput == 1.0
    assert entry.row() == ('synthetic-0', '5tuple', 1.0, 10, 1, 18, 0.0)


def test_min_size_single_flow(single_flow_spec):
    entry = budget_search(SyntheticTrace(single_flow_spec(2000, 64)), FlowKeyMode.FIVE_TUPLE, q=1, q_len=10,
                          target=1.0, batching=WHOLE, n_max=10)
    assert entry.budget_n == 1
    assert entry.latency_ns is None
    assert entry.row()[-1] == ''


@pytest.mark.parametrize("window, expected", [('inclusive', 4), ('exclusive', 5)])
def test_round_robin_flows(distinct_flows, window, expected):
    config = PipelineConfig(w_bits=4, window=window)
    records = [flow_record(f, 64) for f in distinct_flows(5, config.w_bits)] * 400
    entry = budget_search(records, FlowKeyMode.FIVE_TUPLE, q=4, q_len=10, target=1.0, batching=WHOLE,
                          config=config, n_max=12)
    assert entry.budget_n == expected


def test_matches_exhaustive_search(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(3000, seed=2, num_flows=20))), BatchingPolicy(1000, 1000))
    config = PipelineConfig(q=4, q_len=10)
    curve = budget_curve(trace, FlowKeyMode.FIVE_TUPLE, config, n_max=12)
    assert [result.config.n for result in curve] == list(range(1, 13))
    for target in (1.0, 0.999, 0.99, 0.9):
        expected = max(
            n for n in range(1, 13)
            if run_experiment(trace, FlowKeyMode.FIVE_TUPLE, config.replace(n=n)).min_throughput >= target
        )
        assert select_budget(curve, target).config.n == expected
        entry = budget_search(trace, FlowKeyMode.FIVE_TUPLE, q=4, q_len=10, target=target, n_max=12)
        assert entry.budget_n == expected


def test_pooled_is_never_stricter(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(3000, seed=5, num_flows=6))), BatchingPolicy(1000, 1000))
    curve = budget_curve(trace, FlowKeyMode.FIVE_TUPLE, PipelineConfig(q=2, q_len=10), n_max=10)
    for target in (1.0, 0.99, 0.9, 0.5):
        assert select_budget(curve, target, pooled=True).config.n >= select_budget(curve, target).config.n


def test_table_order(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(1000, seed=1))), BatchingPolicy(500, 500))
    entries = budget_table(trace, ['five_tuple', 'global'], qs=[1, 4], q_lens=[10, 100], targets=[1.0, 0.5],
                           n_max=4)
    assert [(e.target, e.q_len, e.q, e.key_mode) for e in entries] == [
        (target, q_len, q, mode)
        for target in (1.0, 0.5)
        for q_len in (10, 100)
        for q in (1, 4)
        for mode in (FlowKeyMode.FIVE_TUPLE, FlowKeyMode.GLOBAL)
    ]
    assert all(1 <= e.budget_n <= 4 for e in entries)


def test_jobs_do_not_change_the_table(mixed_spec):
    trace = SampledTrace(list(generate_synthetic(mixed_spec(1000, seed=6))), BatchingPolicy(500, 500))
    arguments = dict(key_modes=['five_tuple', 'ipdst'], qs=[1, 4], q_lens=[10], targets=[1.0, 0.99], n_max=5)
    assert budget_table(trace, jobs=2, **arguments) == budget_table(trace, jobs=1, **arguments)


def test_invalid_arguments(single_flow_spec):
    trace = SyntheticTrace(single_flow_spec(10))
    with pytest.raises(ConfigurationError):
        budget_search(trace, FlowKeyMode.FIVE_TUPLE, q=1, q_len=10, target=0.0)
    with pytest.raises(ConfigurationError):
        budget_table(trace, ['five_tuple'], [1], [10], [1.5])
    with pytest.raises(ConfigurationError):
        budget_table(trace, ['five_tuple'], [1], [10], [1.0], jobs=0)
    with pytest.raises(ConfigurationError):
        budget_curve(trace, FlowKeyMode.FIVE_TUPLE, PipelineConfig(), n_max=0)
