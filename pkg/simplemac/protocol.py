"""
SimpleMAC wire format and primitives.

    data    = 0x44 || length (8 bytes, big endian) || tag (1 byte) || message
    payload = 0x50 || length || tag || message || HMAC-SHA256(key, data)

The leading kind byte keeps a payload from ever parsing as data.
"""
import hashlib
import hmac
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from config.config import Config

MAC_SIZE = hashlib.sha256().digest_size
_HEADER = struct.Struct(">Q")
DATA_KIND = b"\x44"
PAYLOAD_KIND = b"\x50"


class Fault(Enum):
    NONE = "none"
    CORRUPT_HMAC = "corrupt-hmac"
    TRUNCATE_PAYLOAD = "truncate-payload"
    REPLAY = "replay"


@dataclass(frozen=True)
class SessionParams:
    key: bytes
    message: bytes
    tag: bytes = Config.SIMPLEMAC_TAG
    fault: Fault = Fault.NONE

    def __post_init__(self):
        if len(self.key) != Config.SIMPLEMAC_KEY_SIZE:
            raise ValueError(f"key must be {Config.SIMPLEMAC_KEY_SIZE} bytes, got {len(self.key)}")
        if len(self.tag) != 1:
            raise ValueError("tag must be a single byte")
        if len(self.message) > Config.SIMPLEMAC_MAX_MESSAGE:
            raise ValueError(f"message longer than {Config.SIMPLEMAC_MAX_MESSAGE} bytes")


def _body(tag: bytes, message: bytes) -> bytes:
    return _HEADER.pack(len(message)) + tag + message


def data_bytes(tag: bytes, message: bytes) -> bytes:
    return DATA_KIND + _body(tag, message)


def compute_hmac(key: bytes, data: bytes) -> bytes:
    return hmac.new(key, data, hashlib.sha256).digest()


def build_payload(tag: bytes, message: bytes, mac: bytes) -> bytes:
    return PAYLOAD_KIND + _body(tag, message) + mac


def parse_payload(payload: bytes) -> Optional[Tuple[bytes, bytes, bytes]]:
    """(tag, message, mac), or None for another kind or a length header that does not fit"""
    if len(payload) < _HEADER.size + 2 or payload[:1] != PAYLOAD_KIND:
        return None
    (length,) = _HEADER.unpack_from(payload, 1)
    start = _HEADER.size + 2
    if length > len(payload) - start:
        return None
    tag = payload[start - 1:start]
    return tag, payload[start:start + length], payload[start + length:]


def apply_fault(payload: bytes, fault: Fault) -> bytes:
    if fault is Fault.CORRUPT_HMAC:
        return payload[:-1] + bytes([payload[-1] ^ 0x01])
    if fault is Fault.TRUNCATE_PAYLOAD:
        return payload[:-1]
    return payload


@dataclass(frozen=True)
class ServerCheck:
    """What the server computes for one received payload"""
    data: Optional[bytes]
    expected: Optional[bytes]
    verdict: int


def check_payload(key: bytes, payload: bytes) -> ServerCheck:
    parts = parse_payload(payload)
    if parts is None:
        return ServerCheck(None, None, 0)
    tag, message, mac = parts
    data = data_bytes(tag, message)
    expected = compute_hmac(key, data)
    return ServerCheck(data, expected, int(hmac.compare_digest(mac, expected)))
