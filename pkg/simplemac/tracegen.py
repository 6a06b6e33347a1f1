"""
Deterministic server-role traces for offline runs.

    python -m simplemac.tracegen --sessions 1000 --seed 1 --out trace.jsonl
    python -m simplemac.tracegen --sessions 10 --fault 3:corrupt-hmac --out bad.jsonl
"""
import argparse
import random
import sys
from typing import Dict, IO, Iterable, List, Optional, Sequence, Tuple

from config.config import Config
from engine.program_event import ProgramEvent
from events.event_validator import format_event_line
from simplemac.protocol import Fault, apply_fault, build_payload, check_payload, compute_hmac, data_bytes
from simplemac.server import HMAC_EVENT
from simplemac.setup_key import setup_event

MAX_GENERATED_MESSAGE = 64


def _server_events(key: bytes, payload: bytes, tid: str) -> List[ProgramEvent]:
    events = [ProgramEvent(Config.RECEIVE, (), payload, tid=tid)]
    check = check_payload(key, payload)
    if check.data is not None:
        events.append(ProgramEvent(HMAC_EVENT, (key, check.data), check.expected, tid=tid))
    return events


def _connections(rng: random.Random, key: bytes, sessions: int,
                 faults: Dict[int, Fault]) -> List[Tuple[int, bytes]]:
    connections = []
    for session in range(sessions):
        message = rng.randbytes(rng.randint(1, MAX_GENERATED_MESSAGE))
        mac = compute_hmac(key, data_bytes(Config.SIMPLEMAC_TAG, message))
        fault = faults.get(session, Fault.NONE)
        payload = apply_fault(build_payload(Config.SIMPLEMAC_TAG, message, mac), fault)
        connections.append((session, payload))
        if fault is Fault.REPLAY:
            connections.append((session, payload))
    return connections


def gen_trace(sessions: int, faults: Optional[Dict[int, Fault]] = None, seed: int = 1,
              concurrency: int = 1, setup: bool = True) -> List[ProgramEvent]:
    """Server-side events of ``sessions`` clients, ``concurrency`` of them interleaved round-robin.

    Each group of ``concurrency`` connections is received before any of
    them is verified. With ``setup`` the key is the first event.
    """
    if concurrency < 1:
        raise ValueError("concurrency must be at least 1")
    rng = random.Random(seed)
    key = rng.randbytes(Config.SIMPLEMAC_KEY_SIZE)
    events = [setup_event(key)] if setup else []
    connections = _connections(rng, key, sessions, faults or {})
    for start in range(0, len(connections), concurrency):
        group = [_server_events(key, payload, str(session)) for session, payload in connections[start:start + concurrency]]
        for step in range(max(len(g) for g in group)):
            events.extend(g[step] for g in group if step < len(g))
    return events


def write_trace(events: Iterable[ProgramEvent], stream: IO[str]):
    for event in events:
        stream.write(format_event_line(event) + "\n")


def parse_fault(text: str) -> Tuple[int, Fault]:
    """``INDEX:KIND``, e.g. ``3:corrupt-hmac``"""
    index, _, kind = text.partition(":")
    try:
        return int(index), Fault(kind)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected INDEX:KIND, got {text!r}") from None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m simplemac.tracegen")
    parser.add_argument("--sessions", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--concurrency", type=int, default=1)
    parser.add_argument("--fault", type=parse_fault, action="append", default=[])
    parser.add_argument("--no-setup", action="store_true", help="Leave out the key event")
    parser.add_argument("--out", default="-")
    args = parser.parse_args(argv)

    events = gen_trace(args.sessions, dict(args.fault), args.seed, args.concurrency, not args.no_setup)
    if args.out == "-":
        write_trace(events, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            write_trace(events, handle)
    return Config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
