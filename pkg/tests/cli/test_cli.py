import io
import json
import shlex
import sys

import pytest
import allure

from cli.main import RunConfig, build_parser, config_from_args, main, run
from config.config import Config
from engine.program_event import ProgramEvent
from errors.monitor_errors import EventLineError
from events.event_validator import EventValidator, format_event_line, parse_event_line, read_events
from simplemac.protocol import Fault, build_payload, compute_hmac, data_bytes
from simplemac.setup_key import save_key
from simplemac.tracegen import gen_trace, write_trace


def _write(path, events):
    with open(path, "w", encoding="utf-8") as handle:
        write_trace(events, handle)
    return str(path)


@pytest.mark.cli
@allure.feature('Command Line')
@allure.story('Event Lines')
class TestEventLines:

    @allure.title("Event lines decode hex arguments and return values")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("line,expected", [
        ('{"name": "random", "args": [], "ret": "a1b2"}', ProgramEvent("random", (), b"\xa1\xb2")),
        ('{"name": "send", "args": ["0268"], "ret": ""}', ProgramEvent("send", (b"\x02\x68",), b"")),
        ('{"name": "hmac", "args": ["6b", "00"], "ret": "ff", "ts": 12, "tid": 3}',
         ProgramEvent("hmac", (b"k", b"\x00"), b"\xff")),
    ])
    def test_parse_event_line(self, line, expected):
        event = parse_event_line(line, 1)
        assert event == expected

    @allure.title("Timestamps and thread ids are kept for logging")
    @allure.severity(allure.severity_level.MINOR)
    def test_metadata(self):
        event = parse_event_line('{"name": "receive", "args": [], "ret": "", "ts": 12, "tid": 3}')
        assert (event.ts, event.tid) == (12, "3")
        assert parse_event_line(format_event_line(event)) == event

    @allure.title("Malformed event lines name the offending line")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("line", [
        '{"name": "send", "args": ["0268 69"], "ret": ""}',
        '{"name": "send", "args": ["026"], "ret": ""}',
        '{"name": "send", "args": []}',
        '{"name": "send", "args": [], "ret": "", "extra": 1}',
        '{"name": "1x", "args": [], "ret": ""}',
        'not json',
    ])
    def test_invalid_lines(self, line):
        with pytest.raises(EventLineError) as error:
            parse_event_line(line, 7)
        allure.attach(str(error.value), name="Error", attachment_type=allure.attachment_type.TEXT)
        assert error.value.line_number == 7

    @allure.title("Schema violations are reported with their path")
    @allure.severity(allure.severity_level.NORMAL)
    def test_validator(self):
        validator = EventValidator()
        assert validator.is_valid({"name": "send", "args": ["0268"], "ret": ""})

        with allure.step("A bad argument is located in the args array"):
            data = {"name": "send", "args": ["zz"], "ret": ""}
            assert not validator.is_valid(data)
            assert validator.errors(data)[0].startswith("args/0: ")

    @allure.title("Blank lines are skipped and numbering follows the input")
    @allure.severity(allure.severity_level.MINOR)
    def test_read_events(self):
        lines = ['{"name": "receive", "args": [], "ret": "01"}', "", "   ", "oops"]
        events = read_events(lines)
        assert next(events) == ProgramEvent("receive", (), b"\x01")
        with pytest.raises(EventLineError) as error:
            next(events)
        assert error.value.line_number == 4


@pytest.mark.cli
@allure.feature('Command Line')
@allure.story('Monitor Runs')
class TestRun:

    @pytest.fixture
    def valid_trace(self, tmp_path):
        return _write(tmp_path / "valid.jsonl", gen_trace(3, seed=5))

    @pytest.fixture
    def tampered_trace(self, tmp_path):
        return _write(tmp_path / "tampered.jsonl", gen_trace(3, {1: Fault.CORRUPT_HMAC}, seed=5))

    @allure.title("Valid SimpleMAC server trace exits 0")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    def test_valid_trace(self, valid_trace, capsys):
        with allure.step("Monitor the server role offline"):
            code = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=valid_trace))
            out = capsys.readouterr().out
            allure.attach(out, name="Output", attachment_type=allure.attachment_type.TEXT)

        assert code == Config.EXIT_OK
        assert "accepted 7 events" in out

    @allure.title("Tampered HMAC exits 1 and names the event")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.smoke
    def test_tampered_trace(self, tampered_trace, capsys):
        code = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=tampered_trace))
        out = capsys.readouterr().out

        assert code == Config.EXIT_REJECTED
        assert "input event 4 rejected by monitor" in out

    @allure.title("Payload with an empty HMAC exits 1")
    @allure.severity(allure.severity_level.NORMAL)
    def test_empty_hmac_trace(self, tmp_path, capsys):
        events = gen_trace(1, seed=5)
        key = events[0].ret
        data = data_bytes(Config.SIMPLEMAC_TAG, b"hi")
        events[1:] = [
            ProgramEvent(Config.RECEIVE, (), build_payload(Config.SIMPLEMAC_TAG, b"hi", b"")),
            ProgramEvent("hmac", (key, data), compute_hmac(key, data)),
        ]
        trace = _write(tmp_path / "empty-hmac.jsonl", events)

        code = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace))

        assert code == Config.EXIT_REJECTED
        assert "input event 2 rejected by monitor" in capsys.readouterr().out

    @allure.title("Usage problems exit 2")
    @allure.severity(allure.severity_level.NORMAL)
    def test_usage_errors(self, valid_trace, tmp_path):
        with allure.step("Unknown role"):
            assert run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Attacker", trace=valid_trace)) == Config.EXIT_USAGE

        with allure.step("No event source"):
            assert run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server")) == Config.EXIT_USAGE

        with allure.step("Missing specification"):
            assert run(RunConfig(spec=str(tmp_path / "missing.spthy"), trace=valid_trace)) == Config.EXIT_USAGE

        with allure.step("Missing trace"):
            missing = str(tmp_path / "missing.jsonl")
            assert run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=missing)) == Config.EXIT_USAGE

        with allure.step("Malformed event line"):
            bad = tmp_path / "bad.jsonl"
            bad.write_text('{"name": "receive", "args": [], "ret": "zz"}\n', encoding="utf-8")
            assert run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=str(bad))) == Config.EXIT_USAGE

    @allure.title("Repeated random value exits 1")
    @allure.severity(allure.severity_level.NORMAL)
    def test_likely_stream(self, tmp_path, capsys):
        key = b"\x07" * Config.SIMPLEMAC_KEY_SIZE
        trace = _write(tmp_path / "twice.jsonl", [ProgramEvent("random", (), key)] * 2)
        code = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace))
        assert code == Config.EXIT_REJECTED
        assert "not likely" in capsys.readouterr().out

    @allure.title("Decomposed rules can be printed without an event source")
    @allure.severity(allure.severity_level.MINOR)
    def test_dump_decomposed(self, capsys):
        code = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", dump_decomposed=True))
        out = capsys.readouterr().out
        assert code == Config.EXIT_OK
        assert "Server_start" in out and "Server_end" in out

    @allure.title("Output traces are written as JSON lines")
    @allure.severity(allure.severity_level.NORMAL)
    def test_emit_trace(self, valid_trace, tmp_path):
        emitted = tmp_path / "out.jsonl"
        code = run(RunConfig(
            spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=valid_trace, emit_trace=str(emitted),
        ))
        assert code == Config.EXIT_OK

        (line,) = emitted.read_text(encoding="utf-8").splitlines()
        trace = json.loads(line)
        allure.attach(line, name="Output trace", attachment_type=allure.attachment_type.TEXT)
        assert [f["fact"] for f in trace] == ["ServerAccept"] * 3
        assert all(isinstance(a, str) for f in trace for a in f["args"])

    @allure.title("Setup command output is monitored first")
    @allure.severity(allure.severity_level.NORMAL)
    def test_setup_command(self, tmp_path, monkeypatch):
        monkeypatch.chdir(Config.ROOT_DIR)
        events = gen_trace(2, seed=9)
        key_file = tmp_path / "key.bin"
        save_key(str(key_file), events[0].ret)
        trace = _write(tmp_path / "sessions.jsonl", events[1:])
        setup = f"{shlex.quote(sys.executable)} -m simplemac.setup_key --key-file {shlex.quote(str(key_file))}"

        with allure.step("Without setup the key is unknown"):
            assert run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace)) == Config.EXIT_REJECTED

        with allure.step("With setup the sessions are accepted"):
            cfg = RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace, setup=setup)
            assert run(cfg) == Config.EXIT_OK

        with allure.step("Failing setup command"):
            cfg = RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace,
                            setup=f"{shlex.quote(sys.executable)} -c 'raise SystemExit(3)'")
            assert run(cfg) == Config.EXIT_USAGE

    @allure.title("Online and offline runs reach the same verdict and outputs")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("faults", [{}, {2: Fault.TRUNCATE_PAYLOAD}])
    def test_online_matches_offline(self, tmp_path, monkeypatch, capsys, faults):
        trace = _write(tmp_path / "trace.jsonl", gen_trace(4, faults, seed=11))
        offline_out, online_out = tmp_path / "offline.jsonl", tmp_path / "online.jsonl"

        with allure.step("Offline"):
            offline = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=trace,
                                    emit_trace=str(offline_out)))
            offline_report = capsys.readouterr().out

        with allure.step("Online from standard input"):
            with open(trace, encoding="utf-8") as handle:
                monkeypatch.setattr(sys, "stdin", io.StringIO(handle.read()))
            online = run(RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", stdin=True,
                                   emit_trace=str(online_out)))
            online_report = capsys.readouterr().out

        assert offline == online
        assert offline_report == online_report
        assert offline_out.read_text(encoding="utf-8") == online_out.read_text(encoding="utf-8")

    @allure.title("SIGTERM is sent to the monitored process on rejection")
    @allure.severity(allure.severity_level.NORMAL)
    def test_kill_pid(self, tampered_trace, monkeypatch):
        killed = []
        monkeypatch.setattr("cli.main.terminate", killed.append)
        cfg = RunConfig(spec=Config.SIMPLEMAC_SPEC_PATH, role="Server", trace=tampered_trace, kill_pid=4242)
        assert run(cfg) == Config.EXIT_REJECTED
        assert killed == [4242]


@pytest.mark.cli
@allure.feature('Command Line')
@allure.story('Arguments')
class TestArguments:

    @allure.title("Arguments map onto the run configuration")
    @allure.severity(allure.severity_level.NORMAL)
    def test_config_from_args(self):
        args = build_parser().parse_args([
            "--spec", "s.spthy", "--role", "Server", "--trace", "t.jsonl",
            "--layer", "a.spthy", "--layer", "b.spthy", "-D", "EXTRA", "-vv", "--max-configs", "5",
        ])
        cfg = config_from_args(args)
        assert cfg.layers == ["a.spthy", "b.spthy"]
        assert cfg.flags == ["EXTRA"]
        assert (cfg.verbosity, cfg.max_configs, cfg.mode) == (2, 5, "offline")

    @allure.title("Inconsistent configurations are refused")
    @allure.severity(allure.severity_level.NORMAL)
    @pytest.mark.parametrize("kwargs", [
        {"trace": "t.jsonl", "stdin": True},
        {"trace": "t.jsonl", "max_configs": 0},
    ])
    def test_run_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            RunConfig(spec="s.spthy", **kwargs)

    @allure.title("main parses argv and returns the exit code")
    @allure.severity(allure.severity_level.NORMAL)
    def test_main(self, tmp_path):
        trace = _write(tmp_path / "trace.jsonl", gen_trace(1, seed=2))
        assert main(["--spec", Config.SIMPLEMAC_SPEC_PATH, "--role", "Server", "--trace", trace]) == Config.EXIT_OK

    @allure.title("--trace and --stdin together are a usage error")
    @allure.severity(allure.severity_level.MINOR)
    def test_main_usage(self):
        with pytest.raises(SystemExit) as exit_info:
            main(["--spec", "s.spthy", "--trace", "t.jsonl", "--stdin"])
        assert exit_info.value.code == Config.EXIT_USAGE
