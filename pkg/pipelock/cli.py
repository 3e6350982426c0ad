"""
Command line interface.

Every subcommand writes CSV files to the output directory. Errors are printed to stderr
as one JSON object ``{"error": ..., "message": ...}`` and end the program with status 1.

    pipelock stats --trace trace.pcap --key 5tuple --key ipdst
    pipelock fdh --trace spec.yaml --n-max 30
    pipelock run --trace trace.csv --n 8 --q 4 --qlen 100 --debug-events
    pipelock budget --config experiment.yaml --targets 1.0 0.99 --jobs 4
    pipelock generate --trace spec.yaml --out trace.csv
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from pathlib import Path
from typing import Any, Callable, Sequence

from .data import get_package_version, write_table
from .config import ExperimentConfig, load_config
from .exceptions import ConfigurationError, PipelockException
from .experiment.batching import SampledTrace
from .experiment.budget import budget_table
from .experiment.runner import run_experiment
from .experiment.silicon import silicon_overhead
from .pipeline.hazard import fdh_curve
from .trace import TRACE_FORMATS
from .trace.stats import trace_stats
from .trace.synthetic import SyntheticTrace
from .trace.text import write_csv

__all__ = [
    "main",
    "cmd_stats",
    "cmd_fdh",
    "cmd_run",
    "cmd_budget",
    "cmd_generate",
]

logger = logging.getLogger(__name__)

GENERATED_NAME = 'synthetic.csv'
"""The file ``generate`` writes when ``--out`` is a directory"""


def cmd_stats(config: ExperimentConfig) -> list[Path]:
    """Write the packet size CDF (``size_cdf.csv``) and the flows per window (``flows.csv``)."""
    trace = config.open_trace()
    with trace:
        stats = trace_stats(trace, config.key_modes, config.stats_window)
    flows = []
    for mode in config.key_modes:
        mean = stats.mean_flows(mode)
        flows.extend((mode.label, index, count, mean) for index, count in enumerate(stats.windows[mode]))
    return [
        write_table(config.out / 'size_cdf.csv', ('size', 'cum_fraction'), stats.size_cdf),
        write_table(config.out / 'flows.csv', ('key_mode', 'window', 'distinct_keys', 'mean'), flows),
    ]


def cmd_fdh(config: ExperimentConfig) -> list[Path]:
    """Write the 99th percentile FDH for N = 1 .. n_max and every key mode (``fdh.csv``)."""
    sampled = SampledTrace(config.open_trace(), config.batching)
    rows = []
    for mode in config.key_modes:
        curve = fdh_curve(
            sampled, mode, range(1, config.n_max + 1),
            chunk_bytes=config.pipeline.chunk_bytes,
            gap_cycles=config.pipeline.gap_cycles,
            window=config.pipeline.window,
        )
        rows.extend(row + (int(curve.partial),) for row in curve.rows())
    return [write_table(config.out / 'fdh.csv', ('trace', 'key_mode', 'N', 'fdh_p99', 'batches', 'partial'), rows)]


def cmd_run(config: ExperimentConfig) -> list[Path]:
    """Run the locking engine with the pipeline configuration (``batches.csv``, ``summary.csv``, ``events.csv``)."""
    sampled = SampledTrace(config.open_trace(), config.batching)
    silicon = silicon_overhead(config.pipeline, config.header_bytes)
    batch_rows, summary_rows, event_rows = [], [], []
    for mode in config.key_modes:
        result = run_experiment(
            sampled, mode, config.pipeline, hash_params=config.hash_params, record_events=config.debug_events,
        )
        batch_rows.extend(result.batch_rows())
        summary_rows.append(result.summary_row() + (
            silicon.queue_memory_bytes, silicon.comparator_count, silicon.comparator_bits,
        ))
        event_rows.extend(
            (mode.label, index, e.cycle, e.kind.value, e.queue, e.w) for index, e in result.events
        )

    written = [
        write_table(config.out / 'batches.csv', (
            'trace', 'key_mode', 'batch_index', 'packets', 'partial', 'fdh', 'throughput', 'dropped',
            'latency_p99_cycles', 'latency_p99_ns',
        ), batch_rows),
        write_table(config.out / 'summary.csv', (
            'trace', 'key_mode', 'N', 'Q', 'Q_len', 'W', 'batches', 'min_throughput', 'pooled_throughput',
            'latency_p99_cycles', 'latency_ns', 'queue_memory_bytes', 'comparators', 'comparator_bits',
        ), summary_rows),
    ]
    if config.debug_events:
        written.append(write_table(
            config.out / 'events.csv', ('key_mode', 'batch', 'cycle', 'event', 'queue', 'w'), event_rows,
        ))
    return written


def cmd_budget(config: ExperimentConfig) -> list[Path]:
    """Write the clock cycle budget of every target, Q_len, Q and key mode (``budget.csv``)."""
    entries = budget_table(
        SampledTrace(config.open_trace(), config.batching),
        config.key_modes, config.qs, config.q_lens, config.targets,
        config=config.pipeline,
        n_max=config.n_max,
        pooled=config.pooled,
        hash_params=config.hash_params,
        jobs=config.jobs,
    )
    return [write_table(
        config.out / 'budget.csv',
        ('trace', 'key_mode', 'target', 'Q_len', 'Q', 'budget_N', 'latency_ns'),
        (entry.row() for entry in entries),
    )]


def cmd_generate(config: ExperimentConfig) -> list[Path]:
    """Write a synthetic trace as CSV to ``out``, or to ``synthetic.csv`` inside ``out`` if it is a directory."""
    trace = config.open_trace()
    if not isinstance(trace, SyntheticTrace):
        raise ConfigurationError("generate needs a synthetic trace spec, got %s" % trace)
    path = config.out
    if path.is_dir() or not path.suffix:
        path = path / GENERATED_NAME
    count = write_csv(trace, path)
    logger.info("Generated %d packets", count)
    return [path]


COMMANDS: dict[str, Callable[[ExperimentConfig], list[Path]]] = {
    'stats': cmd_stats,
    'fdh': cmd_fdh,
    'run': cmd_run,
    'budget': cmd_budget,
    'generate': cmd_generate,
}


def _common_arguments() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", help="JSON or YAML experiment config")
    parser.add_argument("--trace", help="pcap file, CSV trace or synthetic spec (JSON/YAML)")
    parser.add_argument("--format", choices=TRACE_FORMATS, help="trace format, guessed from the suffix by default")
    parser.add_argument("--lenient", dest="strict", action="store_false", default=None,
                        help="skip unparsable CSV rows instead of failing")
    parser.add_argument("--key", dest="key_modes", action="append",
                        help="flow key mode: 5tuple, ipsrcdst, ipdst, ipdst16 or global (repeatable)")
    parser.add_argument("--w-bits", dest="w_bits", type=int, help="width of the compressed key")
    parser.add_argument("--window", choices=("inclusive", "exclusive"), help="conflict window of the pipeline")
    parser.add_argument("--chunk-bytes", dest="chunk_bytes", type=int, help="bytes received per clock cycle")
    parser.add_argument("--gap-cycles", dest="gap_cycles", type=int, help="idle cycles between packets")
    parser.add_argument("--clock-ghz", dest="clock_ghz", type=float, help="clock frequency")
    parser.add_argument("--batch-size", dest="batch_size", type=int, help="packets per batch")
    parser.add_argument("--batch-stride", dest="batch_stride", type=int, help="packets between batch starts")
    parser.add_argument("--hash", help="CRC-16 preset used for dispatch, e.g. crc-16/xmodem")
    parser.add_argument("--seed", type=int, help="seed of a synthetic trace")
    parser.add_argument("--out", help="output directory, or a .csv file for generate")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    return parser


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog="pipelock", description="Stateful pipeline hazard and locking simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_package_version()}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    stats = commands.add_parser("stats", parents=[common], help="packet size CDF and flows per window")
    stats.add_argument("--window-packets", dest="stats_window", type=int, help="packets per flow count window")

    fdh = commands.add_parser("fdh", parents=[common], help="fraction of data hazards for N = 1 .. n-max")
    fdh.add_argument("--n-max", dest="n_max", type=int, help="largest pipeline depth")

    run = commands.add_parser("run", parents=[common], help="run the locking engine")
    run.add_argument("--n", type=int, help="pipeline depth")
    run.add_argument("--q", type=int, help="number of queues")
    run.add_argument("--qlen", dest="q_len", type=int, help="queue capacity in headers")
    run.add_argument("--header-bytes", dest="header_bytes", type=int, help="buffered header size")
    run.add_argument("--debug-events", dest="debug_events", action="store_true", default=None,
                     help="write the per-cycle event log")

    budget = commands.add_parser("budget", parents=[common], help="clock cycle budget table")
    budget.add_argument("--n-max", dest="n_max", type=int, help="largest pipeline depth")
    budget.add_argument("--q", dest="qs", type=int, nargs="+", help="numbers of queues")
    budget.add_argument("--qlen", dest="q_lens", type=int, nargs="+", help="queue capacities")
    budget.add_argument("--targets", type=float, nargs="+", help="throughput targets")
    budget.add_argument("--pooled", action="store_true", default=None,
                        help="use the pooled throughput instead of the minimum over the batches")
    budget.add_argument("--jobs", type=int, help="worker processes")

    commands.add_parser("generate", parents=[common], help="write a synthetic trace as CSV")
    return parser


def _error(e: BaseException, path: Any = None) -> None:
    doc = {"error": e.__class__.__name__, "message": str(e)}
    path = path or getattr(e, 'filename', None)
    if path:
        doc["path"] = str(path)
    print(json.dumps(doc), file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line interface.

    :param argv: The arguments, ``sys.argv[1:]`` if not set
    :return: The exit status
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.WARNING - 10 * args.verbose, logging.DEBUG),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    overrides = {k: v for k, v in vars(args).items() if k not in ('command', 'config', 'verbose')}
    try:
        config = load_config(args.config, overrides)
        if args.command != 'generate':
            config.out.mkdir(parents=True, exist_ok=True)
        for path in COMMANDS[args.command](config):
            logger.info("Wrote %s", path)
    except (PipelockException, OSError) as e:
        logger.debug("%s failed", args.command, exc_info=True)
        _error(e)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
