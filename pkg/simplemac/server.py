"""
SimpleMAC server: one payload per connection, answered with b"1" when the
HMAC matches and b"0" otherwise. Sessions are handled concurrently.

    python -m simplemac.server --key-file key.bin --sessions 100 --events server.jsonl
"""
import argparse
import logging
import socket
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from config.config import Config
from simplemac.event_writer import EventWriter
from simplemac.protocol import MAC_SIZE, check_payload
from simplemac.setup_key import load_key

logger = logging.getLogger(__name__)

HMAC_EVENT = "hmac"
MAX_PAYLOAD = 8 + 1 + Config.SIMPLEMAC_MAX_MESSAGE + MAC_SIZE


def read_until_eof(conn: socket.socket, limit: int = MAX_PAYLOAD) -> bytes:
    chunks = []
    size = 0
    while True:
        chunk = conn.recv(4096)
        if not chunk:
            return b"".join(chunks)
        size += len(chunk)
        if size > limit:
            raise ConnectionError(f"payload exceeds {limit} bytes")
        chunks.append(chunk)


class SimpleMacServer:

    def __init__(self, key: bytes, writer: EventWriter,
                 host: str = Config.SIMPLEMAC_HOST, port: int = Config.SIMPLEMAC_PORT):
        self.key = key
        self.writer = writer
        self.socket = socket.create_server((host, port))
        self.host = host
        self.port = self.socket.getsockname()[1]
        logger.info("listening on %s:%d", host, self.port)

    def handle(self, conn: socket.socket, session: int) -> int:
        tid = str(session)
        with conn:
            conn.settimeout(Config.SOCKET_TIMEOUT)
            payload = read_until_eof(conn)
            self.writer.emit(Config.RECEIVE, (), payload, tid)
            check = check_payload(self.key, payload)
            if check.data is None:
                logger.warning("session %d: malformed payload of %d bytes", session, len(payload))
            else:
                self.writer.emit(HMAC_EVENT, (self.key, check.data), check.expected, tid)
            conn.sendall(str(check.verdict).encode("ascii"))
        logger.info("session %d: verdict %d", session, check.verdict)
        return check.verdict

    def serve(self, sessions: int, workers: Optional[int] = None) -> List[int]:
        """Accept ``sessions`` connections; verdicts in order of acceptance"""
        workers = workers or max(1, min(32, sessions))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = []
            for session in range(sessions):
                conn, _ = self.socket.accept()
                futures.append(pool.submit(self.handle, conn, session))
            return [f.result() for f in futures]

    def close(self):
        self.socket.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def run_server(port: int, sessions: int, key: bytes, writer: EventWriter,
               host: str = Config.SIMPLEMAC_HOST) -> List[int]:
    with SimpleMacServer(key, writer, host, port) as server:
        return server.serve(sessions)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m simplemac.server")
    parser.add_argument("--key-file", required=True)
    parser.add_argument("--host", default=Config.SIMPLEMAC_HOST)
    parser.add_argument("--port", type=int, default=Config.SIMPLEMAC_PORT)
    parser.add_argument("--sessions", type=int, default=1)
    parser.add_argument("--events", default="-", help="Event line output file (default: standard output)")
    args = parser.parse_args(argv)
    logging.basicConfig(level="INFO", format=Config.LOG_FORMAT, stream=sys.stderr)

    key = load_key(args.key_file)
    stream = sys.stdout if args.events == "-" else open(args.events, "w", encoding="utf-8")
    try:
        verdicts = run_server(args.port, args.sessions, key, EventWriter(stream), args.host)
    finally:
        if stream is not sys.stdout:
            stream.close()
    logger.info("%d of %d sessions verified", sum(verdicts), len(verdicts))
    return Config.EXIT_OK if all(verdicts) else Config.EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
