"""
Experiment configuration.

A configuration document is a JSON or YAML mapping with the sections of the packaged ``defaults.yaml``
plus the trace to use::

    trace: traces/backbone.pcap     # or an inline synthetic spec:
    # synthetic: {num_packets: 1000000, seed: 1, size_model: {...}, flow_model: {...}}
    pipeline: {n: 8, q: 4, q_len: 100}
    sweep: {q: [1, 4], q_len: [10, 100], targets: [1.0, 0.99]}
    flow: {key_modes: [five_tuple, ipdst], hash: crc-16/xmodem}
    out: results

Values from the command line override the document, the document overrides the defaults.
"""
from __future__ import annotations

import logging
import os

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .data import load_defaults
from .exceptions import ConfigurationError, PipelockException
from .experiment.batching import BatchingPolicy
from .experiment.silicon import HEADER_BYTES
from .flow import FlowKeyMode, HashParams
from .pipeline import HazardWindow, PipelineConfig
from .trace import TRACE_FORMATS, TraceSource, open_trace
from .trace.synthetic import SyntheticSpec, SyntheticTrace

__all__ = [
    "ExperimentConfig",
    "load_config",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig(object):
    """Everything a command needs to run."""

    trace: Path | None = None
    """A pcap, CSV or synthetic spec file"""
    synthetic: SyntheticSpec | None = None
    """An inline synthetic trace, instead of ``trace``"""
    format: str | None = None  # noqa: F402
    """The format of ``trace``, guessed from the suffix if not set"""
    strict: bool = True
    """Abort on unparsable CSV rows instead of skipping them"""
    key_modes: tuple[FlowKeyMode, ...] = (FlowKeyMode.FIVE_TUPLE,)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    batching: BatchingPolicy = field(default_factory=BatchingPolicy)
    n_max: int = 30
    """The largest pipeline depth of FDH curves and budget sweeps"""
    qs: tuple[int, ...] = (1, 4, 8, 16)
    """Queue counts of the budget sweep"""
    q_lens: tuple[int, ...] = (10, 100)
    """Queue capacities of the budget sweep"""
    targets: tuple[float, ...] = (1.0, 0.999, 0.99)
    """Throughput targets of the budget sweep"""
    hash_params: HashParams = field(default_factory=HashParams)
    header_bytes: int = HEADER_BYTES
    stats_window: int = 1_000_000
    """Packets per window when counting flows"""
    seed: int | None = None
    """Replaces the seed of a synthetic trace"""
    out: Path = Path('results')
    """The output directory (the output file for ``generate``)"""
    pooled: bool = False
    """Budgets use the pooled throughput instead of the minimum over the batches"""
    jobs: int = 1
    """Worker processes for budget sweeps"""
    debug_events: bool = False
    """Write the event log of the locking engine"""

    def __post_init__(self) -> None:
        if (self.trace is None) == (self.synthetic is None):
            raise ConfigurationError("Exactly one trace source is needed: a trace file or an inline synthetic spec")
        if self.format is not None and self.format not in TRACE_FORMATS:
            raise ConfigurationError(
                "Unknown trace format %r, choose one of %s" % (self.format, ', '.join(TRACE_FORMATS))
            )
        if not self.key_modes:
            raise ConfigurationError("At least one flow key mode is needed")
        if self.n_max < 1 or self.n_max > 30:
            raise ConfigurationError("n_max must be between 1 and 30, got %r" % self.n_max)
        if not self.qs or not self.q_lens or not self.targets:
            raise ConfigurationError("The budget sweep needs at least one Q, Q_len and target")
        if any(q < 1 for q in self.qs) or any(q_len < 1 for q_len in self.q_lens):
            raise ConfigurationError("Q and Q_len must be at least 1")
        if any(not 0 < t <= 1 for t in self.targets):
            raise ConfigurationError("Throughput targets must be in (0, 1]")
        if self.stats_window < 1:
            raise ConfigurationError("The stats window must be at least 1 packet")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be at least 1")

    def open_trace(self) -> TraceSource:
        """The trace source, with the seed override applied to synthetic traces."""
        if self.synthetic is not None:
            source = SyntheticTrace(self.synthetic)
        else:
            kwargs = {'strict': self.strict} if (self.format or self.trace.suffix.lower()) in ('csv', '.csv') else {}
            source = open_trace(self.trace, self.format, **kwargs)
        if self.seed is not None:
            if isinstance(source, SyntheticTrace):
                source = SyntheticTrace(replace(source.spec, seed=self.seed), name=source.name)
            else:
                logger.debug("Ignoring the seed, %s is not synthetic", source)
        return source


def _read_document(path: str | os.PathLike) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError("Config file not found: %s" % path)
    try:
        doc = yaml.safe_load(path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        raise ConfigurationError("%s: %s" % (path, e)) from e
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigurationError("%s: the config must be a mapping" % path)
    return doc


def _merge(base: Mapping[str, Any], update: Mapping[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _tuple(value: Any) -> tuple:
    return tuple(value) if isinstance(value, (list, tuple)) else (value,)


def load_config(path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """
    Build the configuration of a command.

    :param path: A JSON or YAML config document, optional
    :param overrides: Flat values from the command line, ``None`` values are ignored. Known keys are
        ``trace``, ``format``, ``strict``, ``key_modes``, ``n``, ``q``, ``q_len``, ``w_bits``, ``window``,
        ``chunk_bytes``, ``gap_cycles``, ``clock_ghz``, ``batch_size``, ``batch_stride``, ``n_max``, ``qs``,
        ``q_lens``, ``targets``, ``hash``, ``header_bytes``, ``stats_window``, ``seed``, ``out``, ``pooled``,
        ``jobs`` and ``debug_events``
    :return: The configuration
    :raises ConfigurationError: If a value is invalid or a referenced file does not exist
    """
    doc = _merge(load_defaults(), _read_document(path) if path is not None else {})
    flat = {k: v for k, v in (overrides or {}).items() if v is not None}

    def pick(key: str, section: str) -> Any:
        return flat.get(key, doc.get(section, {}).get(key))

    try:
        pipeline = PipelineConfig(
            n=pick('n', 'pipeline'),
            q=pick('q', 'pipeline'),
            q_len=pick('q_len', 'pipeline'),
            w_bits=pick('w_bits', 'pipeline'),
            window=HazardWindow(pick('window', 'pipeline')),
            chunk_bytes=pick('chunk_bytes', 'clock'),
            gap_cycles=pick('gap_cycles', 'clock'),
            clock_ghz=float(pick('clock_ghz', 'clock')),
        )
        batching = BatchingPolicy(
            batch_size=pick('batch_size', 'batching'),
            batch_stride=pick('batch_stride', 'batching'),
        )

        trace = flat.get('trace', doc.get('trace'))
        if trace is not None:
            trace = Path(trace)
            if not trace.is_file():
                raise ConfigurationError("Trace not found: %s" % trace)
        synthetic = None if 'trace' in flat else doc.get('synthetic')
        if synthetic is not None:
            synthetic = SyntheticSpec.from_dict(synthetic)

        seed = flat.get('seed', doc.get('seed'))
        return ExperimentConfig(
            trace=trace,
            synthetic=synthetic,
            format=flat.get('format', doc.get('format')),
            strict=bool(flat.get('strict', doc.get('strict', True))),
            key_modes=tuple(FlowKeyMode.parse(m) for m in _tuple(pick('key_modes', 'flow'))),
            pipeline=pipeline,
            batching=batching,
            n_max=int(pick('n_max', 'sweep')),
            qs=tuple(int(q) for q in _tuple(flat.get('qs', doc['sweep']['q']))),
            q_lens=tuple(int(q) for q in _tuple(flat.get('q_lens', doc['sweep']['q_len']))),
            targets=tuple(float(t) for t in _tuple(pick('targets', 'sweep'))),
            hash_params=HashParams.from_config(flat.get('hash', doc.get('flow', {}).get('hash'))),
            header_bytes=int(flat.get('header_bytes', doc.get('header_bytes', HEADER_BYTES))),
            stats_window=int(flat.get('stats_window', doc.get('stats', {}).get('window'))),
            seed=None if seed is None else int(seed),
            out=Path(flat.get('out', doc.get('out', 'results'))),
            pooled=bool(flat.get('pooled', doc.get('pooled', False))),
            jobs=int(flat.get('jobs', doc.get('jobs', 1))),
            debug_events=bool(flat.get('debug_events', doc.get('debug_events', False))),
        )
    except PipelockException:
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigurationError("Invalid configuration: %s" % e) from e
