"""
SimpleMAC client. Emits the message input as ``receive``, then ``hmac``
and one ``send`` per transmitted payload; faults are applied after the
HMAC is computed.

    python -m simplemac.client --key-file key.bin --message 6869 --fault corrupt-hmac
"""
import argparse
import logging
import socket
import sys
from typing import List, Optional, Sequence

from config.config import Config
from simplemac.event_writer import EventWriter
from simplemac.protocol import Fault, SessionParams, apply_fault, build_payload, compute_hmac, data_bytes
from simplemac.server import HMAC_EVENT
from simplemac.setup_key import load_key

logger = logging.getLogger(__name__)


def exchange(payload: bytes, host: str, port: int) -> int:
    """Send one payload and return the server's verdict"""
    with socket.create_connection((host, port), timeout=Config.SOCKET_TIMEOUT) as conn:
        conn.sendall(payload)
        conn.shutdown(socket.SHUT_WR)
        reply = conn.recv(1)
    return int(reply.decode("ascii") or 0)


def run_client(params: SessionParams, writer: EventWriter,
               host: str = Config.SIMPLEMAC_HOST, port: int = Config.SIMPLEMAC_PORT,
               tid: Optional[str] = None) -> List[int]:
    """One SimpleMAC session; returns the verdict of every transmission"""
    writer.emit(Config.RECEIVE, (), params.message, tid)
    data = data_bytes(params.tag, params.message)
    mac = compute_hmac(params.key, data)
    writer.emit(HMAC_EVENT, (params.key, data), mac, tid)
    payload = apply_fault(build_payload(params.tag, params.message, mac), params.fault)

    verdicts = []
    for _ in range(2 if params.fault is Fault.REPLAY else 1):
        writer.emit(Config.SEND, (payload,), b"", tid)
        verdicts.append(exchange(payload, host, port))
    logger.info("client %s: verdicts %s", tid or "-", verdicts)
    return verdicts


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m simplemac.client")
    parser.add_argument("--key-file", required=True)
    parser.add_argument("--host", default=Config.SIMPLEMAC_HOST)
    parser.add_argument("--port", type=int, default=Config.SIMPLEMAC_PORT)
    parser.add_argument("--message", required=True, help="Message bytes in hex")
    parser.add_argument("--fault", choices=[f.value for f in Fault], default=Fault.NONE.value)
    parser.add_argument("--events", default="-", help="Event line output file (default: standard output)")
    args = parser.parse_args(argv)
    logging.basicConfig(level="INFO", format=Config.LOG_FORMAT, stream=sys.stderr)

    params = SessionParams(load_key(args.key_file), bytes.fromhex(args.message), fault=Fault(args.fault))
    stream = sys.stdout if args.events == "-" else open(args.events, "w", encoding="utf-8")
    try:
        verdicts = run_client(params, EventWriter(stream), args.host, args.port)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return Config.EXIT_OK if all(verdicts) else Config.EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
