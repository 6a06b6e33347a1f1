"""Configuration file for monitor settings"""
import os


class Config:
    """Monitor configuration settings"""

    # Repository paths
    ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    MODELS_DIR = os.path.join(ROOT_DIR, "models")
    SIMPLEMAC_SPEC_PATH = os.path.join(MODELS_DIR, "simplemac.spthy")
    SIMPLEMAC_FIGURE_SPEC_PATH = os.path.join(MODELS_DIR, "simplemac_figure.spthy")
    BLAKE2S_LAYER_PATH = os.path.join(MODELS_DIR, "layers", "blake2s.spthy")
    EVENT_SCHEMA_PATH = os.path.join(ROOT_DIR, "events", "event_schema.json")

    # Preprocessor
    DEFAULT_FLAGS = ("MONITOR",)
    FLAGS_ENV_VAR = "MONITOR_FLAGS"

    # Engine limits
    MAX_CONFIGURATIONS = 10000
    ENFORCE_FORMAT_DISJOINTNESS = True

    # Format strings (widths in bytes)
    MAX_FIELD_WIDTH = 2**31 - 1
    MAX_LENGTH_FIELD_WIDTH = 8

    # Reserved event symbols bound to the special rules
    RECEIVE = "receive"
    RANDOM = "random"
    SEND = "send"

    # Exit codes
    EXIT_OK = 0
    EXIT_REJECTED = 1
    EXIT_USAGE = 2

    # Logging
    LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
    LOG_LEVELS = ("WARNING", "INFO", "DEBUG")

    # SimpleMAC fixtures
    SIMPLEMAC_HOST = "127.0.0.1"
    SIMPLEMAC_PORT = 9477
    SIMPLEMAC_KEY_SIZE = 32
    SIMPLEMAC_TAG = b"\x02"
    SIMPLEMAC_MAX_MESSAGE = 2**16
    SOCKET_TIMEOUT = 10
