"""
Pre-shared key handling. Run as a module to print the key as a setup
``random`` event for the monitor:

    python -m simplemac.setup_key --key-file key.bin
"""
import argparse
import secrets
import sys
from typing import Optional, Sequence

from config.config import Config
from engine.program_event import ProgramEvent
from events.event_validator import format_event_line


def generate_key() -> bytes:
    return secrets.token_bytes(Config.SIMPLEMAC_KEY_SIZE)


def load_key(path: str) -> bytes:
    with open(path, "rb") as handle:
        key = handle.read()
    if len(key) != Config.SIMPLEMAC_KEY_SIZE:
        raise ValueError(f"{path}: expected a {Config.SIMPLEMAC_KEY_SIZE}-byte key, found {len(key)} bytes")
    return key


def save_key(path: str, key: bytes):
    with open(path, "wb") as handle:
        handle.write(key)


def setup_event(key: bytes) -> ProgramEvent:
    return ProgramEvent(Config.RANDOM, (), key)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m simplemac.setup_key", description=__doc__.splitlines()[1])
    parser.add_argument("--key-file", required=True, help="File holding the raw key bytes")
    parser.add_argument("--generate", action="store_true", help="Write a new random key to --key-file first")
    args = parser.parse_args(argv)
    if args.generate:
        save_key(args.key_file, generate_key())
    try:
        key = load_key(args.key_file)
    except (OSError, ValueError) as exc:
        print(exc, file=sys.stderr)
        return Config.EXIT_USAGE
    print(format_event_line(setup_event(key)))
    return Config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
