"""
Clock cycle budgets.

The budget of a configuration is the largest pipeline depth N, up to ``n_max``, whose throughput still
reaches a target. Throughput is not assumed to be monotonic in N, every depth is simulated.
"""
from __future__ import annotations

import logging

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from ..exceptions import ConfigurationError
from ..flow import FlowKeyMode, HashParams
from ..pipeline import PipelineConfig
from .batching import Batch, BatchingPolicy, SampledTrace
from .runner import ExperimentResult, run_experiment

__all__ = [
    "BudgetEntry",
    "budget_curve",
    "budget_search",
    "budget_table",
    "select_budget",
]

logger = logging.getLogger(__name__)

N_MAX = 30


@dataclass(frozen=True)
class BudgetEntry(object):
    """One cell of a budget table."""

    trace: str
    key_mode: FlowKeyMode
    target: float
    """The throughput that has to be sustained"""
    q_len: int
    q: int
    budget_n: int
    """The largest N that sustains the target"""
    latency_ns: float | None
    """The latency at ``budget_n``, only reported if ``budget_n > 1``"""
    throughput: float
    """The throughput at ``budget_n``"""

    def row(self) -> tuple[Any, ...]:
        return (
            self.trace, self.key_mode.label, self.target, self.q_len, self.q, self.budget_n,
            '' if self.latency_ns is None else self.latency_ns,
        )


def _check_target(target: float) -> None:
    if not 0 < target <= 1:
        raise ConfigurationError("Throughput targets must be in (0, 1], got %r" % target)


def budget_curve(
        trace: Any,
        key_mode: FlowKeyMode,
        config: PipelineConfig,
        batching: BatchingPolicy | None = None,
        n_max: int = N_MAX,
        hash_params: HashParams = HashParams(),
) -> list[ExperimentResult]:
    """
    Run the experiment for every N from 1 to ``n_max``.

    :return: The results, the one for N at index ``N - 1``
    """
    if n_max < 1:
        raise ConfigurationError("n_max must be at least 1, got %r" % n_max)
    sampled = SampledTrace.wrap(trace, batching)
    return [
        run_experiment(sampled, key_mode, config.replace(n=n), hash_params=hash_params)
        for n in range(1, n_max + 1)
    ]


def select_budget(curve: Sequence[ExperimentResult], target: float, pooled: bool = False) -> ExperimentResult:
    """
    Pick the result with the largest N whose throughput reaches ``target``.

    :param curve: The output of :func:`budget_curve`
    :param target: The throughput target, in (0, 1]
    :param pooled: Compare the pooled throughput instead of the minimum over the batches
    """
    _check_target(target)
    qualifying = [result for result in curve if result.throughput(pooled) >= target]
    if not qualifying:
        # N = 1 never drops, so this only happens for a curve that does not start at 1
        return curve[0]
    return max(qualifying, key=lambda result: result.config.n)


def _entry(curve: Sequence[ExperimentResult], target: float, pooled: bool) -> BudgetEntry:
    best = select_budget(curve, target, pooled)
    return BudgetEntry(
        trace=best.trace,
        key_mode=best.key_mode,
        target=target,
        q_len=best.config.q_len,
        q=best.config.q,
        budget_n=best.config.n,
        latency_ns=best.latency_ns if best.config.n > 1 else None,
        throughput=best.throughput(pooled),
    )


def budget_search(
        trace: Any,
        key_mode: FlowKeyMode,
        q: int,
        q_len: int,
        target: float,
        batching: BatchingPolicy | None = None,
        config: PipelineConfig | None = None,
        n_max: int = N_MAX,
        pooled: bool = False,
        hash_params: HashParams = HashParams(),
) -> BudgetEntry:
    """
    Find the clock cycle budget of one configuration.

    :param trace: The trace, a :class:`pipelock.experiment.batching.SampledTrace` to share the sampling
    :param key_mode: The flow key mode
    :param q: The number of queues
    :param q_len: The queue capacity
    :param target: The throughput target, 1.0 means no drops in any batch
    :param batching: The batch sampling
    :param config: The remaining pipeline parameters (W, clocking), the defaults if not set
    :param n_max: The largest N to try
    :param pooled: Use the pooled throughput instead of the minimum over the batches
    :param hash_params: The CRC used for dispatch
    :return: The budget and the latency at the budget
    """
    _check_target(target)
    config = (config or PipelineConfig()).replace(q=q, q_len=q_len)
    curve = budget_curve(trace, key_mode, config, batching, n_max, hash_params)
    return _entry(curve, target, pooled)


def _curve_task(args: tuple) -> list[ExperimentResult]:
    name, batches, policy, key_mode, config, n_max, hash_params = args
    sampled = SampledTrace.from_batches(name, batches, policy)
    return budget_curve(sampled, key_mode, config, n_max=n_max, hash_params=hash_params)


def budget_table(
        trace: Any,
        key_modes: Iterable[FlowKeyMode],
        qs: Iterable[int],
        q_lens: Iterable[int],
        targets: Iterable[float],
        config: PipelineConfig | None = None,
        batching: BatchingPolicy | None = None,
        n_max: int = N_MAX,
        pooled: bool = False,
        hash_params: HashParams = HashParams(),
        jobs: int = 1,
) -> list[BudgetEntry]:
    """
    Compute the budget for every combination of target, queue capacity, queue count and key mode.

    Every combination of key mode, Q and Q_len is simulated once for all targets.
    With ``jobs > 1`` these sweeps run in a process pool; the result does not depend on ``jobs``.

    :return: The entries, ordered by target, Q_len, Q and key mode
    """
    key_modes = [FlowKeyMode.parse(mode) for mode in key_modes]
    qs, q_lens, targets = list(qs), list(q_lens), list(targets)
    for target in targets:
        _check_target(target)
    if jobs < 1:
        raise ConfigurationError("jobs must be at least 1, got %r" % jobs)

    base = config or PipelineConfig()
    sampled = SampledTrace.wrap(trace, batching)
    points = [(mode, q, q_len) for q_len in q_lens for q in qs for mode in key_modes]

    if jobs == 1:
        curves = [
            budget_curve(sampled, mode, base.replace(q=q, q_len=q_len), n_max=n_max, hash_params=hash_params)
            for mode, q, q_len in points
        ]
    else:
        batches: list[Batch] = sampled.batches()
        tasks = [
            (sampled.name, batches, sampled.policy, mode, base.replace(q=q, q_len=q_len), n_max, hash_params)
            for mode, q, q_len in points
        ]
        logger.info("Running %d budget sweeps on %d processes", len(tasks), jobs)
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            curves = list(executor.map(_curve_task, tasks))

    by_point = dict(zip(points, curves))
    return [
        _entry(by_point[mode, q, q_len], target, pooled)
        for target in targets
        for q_len in q_lens
        for q in qs
        for mode in key_modes
    ]
