"""
Command-line entry point.

    python -m cli --spec models/simplemac.spthy --role Server --trace run.jsonl
    server | python -m cli --spec models/simplemac.spthy --role Server --stdin \\
        --setup "python -m simplemac.setup_key --key-file key.bin" --kill-pid 4242
"""
import argparse
import itertools
import json
import logging
import os
import shlex
import signal
import subprocess
import sys
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

from config.config import Config
from decompose.split_rule import split_ruleset
from engine.monitor import initial_state
from engine.program_event import ProgramEvent
from errors.monitor_errors import (
    EventLineError,
    FormatError,
    LikelyStreamViolation,
    MonitorAbort,
    SpecError,
)
from events.event_validator import read_events
from protocol_spec.elaborate import elaborate
from protocol_spec.parser import load_spec
from protocol_spec.preprocess import active_flags
from protocol_spec.printer import print_rules
from rewrite.layer import RewriteLayer
from rewrite.pipeline import Pipeline, PipelineResult, run_pipeline
from terms.facts import GroundFact

logger = logging.getLogger(__name__)

ONLINE = "online"
OFFLINE = "offline"


@dataclass
class RunConfig:
    spec: str
    role: Optional[str] = None
    trace: Optional[str] = None
    stdin: bool = False
    layers: List[str] = field(default_factory=list)
    setup: Optional[str] = None
    kill_pid: Optional[int] = None
    emit_trace: Optional[str] = None
    max_configs: int = Config.MAX_CONFIGURATIONS
    dump_decomposed: bool = False
    verbosity: int = 0
    flags: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.trace is not None and self.stdin:
            raise ValueError("--trace and --stdin are mutually exclusive")
        if self.max_configs < 1:
            raise ValueError("--max-configs must be positive")

    @property
    def mode(self) -> Optional[str]:
        if self.stdin:
            return ONLINE
        return OFFLINE if self.trace is not None else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m cli",
        description="Monitor a stream of program events against a protocol specification",
    )
    parser.add_argument("--spec", required=True, help="Path to the specification file")
    parser.add_argument("--role", help="Role to monitor (default: every rule)")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--trace", help="Offline mode: read event lines from this file")
    source.add_argument("--stdin", action="store_true", help="Online mode: read event lines from standard input")
    parser.add_argument(
        "--layer", dest="layers", action="append", default=[],
        help="Rewrite layer specification, applied in the order given (repeatable)",
    )
    parser.add_argument("--setup", help="Command whose standard output is read as setup events first")
    parser.add_argument("--kill-pid", type=int, help="Send SIGTERM to this process when an event is rejected")
    parser.add_argument("--emit-trace", help="Write the output traces of the surviving configurations here")
    parser.add_argument(
        "--max-configs", type=int, default=Config.MAX_CONFIGURATIONS,
        help=f"Abort when more configurations survive (default {Config.MAX_CONFIGURATIONS})",
    )
    parser.add_argument("--dump-decomposed", action="store_true", help="Print the decomposed rule set")
    parser.add_argument("-D", "--define", dest="flags", action="append", default=[],
                        help="Extra preprocessor flag (MONITOR is always set)")
    parser.add_argument("-v", "--verbose", dest="verbosity", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        spec=args.spec,
        role=args.role,
        trace=args.trace,
        stdin=args.stdin,
        layers=list(args.layers),
        setup=args.setup,
        kill_pid=args.kill_pid,
        emit_trace=args.emit_trace,
        max_configs=args.max_configs,
        dump_decomposed=args.dump_decomposed,
        verbosity=args.verbosity,
        flags=list(args.flags),
    )


def configure_logging(verbosity: int):
    level = Config.LOG_LEVELS[min(verbosity, len(Config.LOG_LEVELS) - 1)]
    logging.basicConfig(level=level, format=Config.LOG_FORMAT, stream=sys.stderr)


def setup_events(command: str) -> Iterator[ProgramEvent]:
    """Run the setup command and decode its standard output"""
    logger.info("running setup command: %s", command)
    completed = subprocess.run(shlex.split(command), capture_output=True, text=True, check=True)
    events = list(read_events(completed.stdout.splitlines()))
    logger.info("setup produced %d events", len(events))
    return iter(events)


def _encode_value(value):
    return value if isinstance(value, int) else value.hex()


def _encode_fact(fact: GroundFact) -> dict:
    return {"fact": fact.symbol, "args": [_encode_value(a) for a in fact.args]}


def write_output_traces(path: str, result: PipelineResult):
    with open(path, "w", encoding="utf-8") as handle:
        for trace in result.outputs():
            handle.write(json.dumps([_encode_fact(f) for f in trace]) + "\n")
    logger.info("wrote %d output traces to %s", len(result.outputs()), path)


def terminate(pid: int):
    try:
        os.kill(pid, signal.SIGTERM)
        logger.warning("sent SIGTERM to process %d", pid)
    except ProcessLookupError:
        logger.warning("process %d is not running", pid)
    except PermissionError:
        logger.error("not allowed to signal process %d", pid)


def _build_pipeline(cfg: RunConfig, flags) -> Optional[Pipeline]:
    spec = load_spec(cfg.spec, flags)
    elaboration = elaborate(spec, cfg.role)
    rules = split_ruleset(elaboration.rules)
    if cfg.dump_decomposed:
        sys.stdout.write(print_rules(rules))
    if cfg.mode is None:
        return None
    layers = [RewriteLayer.from_file(path, flags) for path in cfg.layers]
    sink = initial_state(rules, spec.formats, max_configs=cfg.max_configs)
    return Pipeline(sink, layers)


def run(cfg: RunConfig) -> int:
    """Monitor the configured event source; returns the process exit code"""
    flags = active_flags(cfg.flags)
    try:
        pipeline = _build_pipeline(cfg, flags)
    except (SpecError, FormatError) as exc:
        logger.error("%s", exc)
        return Config.EXIT_USAGE
    except OSError as exc:
        logger.error("cannot read specification: %s", exc)
        return Config.EXIT_USAGE
    if pipeline is None:
        if cfg.dump_decomposed:
            return Config.EXIT_OK
        logger.error("no event source: give --trace or --stdin")
        return Config.EXIT_USAGE

    try:
        setup = setup_events(cfg.setup) if cfg.setup else iter(())
    except (OSError, subprocess.CalledProcessError, EventLineError) as exc:
        logger.error("setup command failed: %s", exc)
        return Config.EXIT_USAGE

    logger.info("monitoring %s (%s mode, role %s)", cfg.spec, cfg.mode, cfg.role or "all")
    try:
        stream = sys.stdin if cfg.stdin else open(cfg.trace, "r", encoding="utf-8")
    except OSError as exc:
        logger.error("cannot read trace: %s", exc)
        return Config.EXIT_USAGE

    try:
        result = run_pipeline(pipeline, itertools.chain(setup, read_events(stream)))
    except LikelyStreamViolation as exc:
        print(f"rejected: {exc}")
        if cfg.kill_pid is not None:
            terminate(cfg.kill_pid)
        return Config.EXIT_REJECTED
    except (MonitorAbort, EventLineError, FormatError) as exc:
        logger.critical("%s", exc)
        return Config.EXIT_USAGE
    finally:
        if stream is not sys.stdin:
            stream.close()

    if cfg.emit_trace:
        write_output_traces(cfg.emit_trace, result)
    print(result.describe())
    if result.accepted:
        logger.info("stream accepted with %d configurations", len(result.sink.configs))
        return Config.EXIT_OK
    if cfg.kill_pid is not None:
        terminate(cfg.kill_pid)
    return Config.EXIT_REJECTED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    configure_logging(cfg.verbosity)
    return run(cfg)
