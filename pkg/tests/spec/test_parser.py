import pytest
import allure

from config.config import Config
from errors.monitor_errors import (
    ArityError,
    DuplicateSymbolError,
    RuleShapeError,
    SpecSyntaxError,
    UndeclaredSymbolError,
    UnknownRoleError,
)
from protocol_spec.elaborate import elaborate
from protocol_spec.model import EMIT, MODE_REWRITE
from protocol_spec.parser import load_spec, parse_spec
from protocol_spec.preprocess import active_flags, preprocess
from protocol_spec.printer import print_rules, print_spec
from terms.term import App, FormatApp, PubName, Variable

HINTS_TWICE = """
theory Hints
begin
functions: h/1
rule A: [ In(x) ] --[ Hint('h', <x>, _) ]-> [ ]
rule B: [ In(y) ] --[ Hint('h', <y>, _) ]-> [ ]
end
"""

TWO_TRIGGERS = """
theory Shapes
begin
rule Good [role=Server]: [ In(x) ] --[ Trig('f', <x>, y) ]-> [ S(x) ]
rule Bad [role=Client]: [ In(x) ] --[ Trig('f', <x>, y), Trig('g', <y>, z) ]-> [ C(x) ]
end
"""


@pytest.mark.spec
@allure.feature('Specification')
@allure.story('Parsing')
class TestParser:

    @pytest.fixture
    def simplemac(self):
        return load_spec(Config.SIMPLEMAC_SPEC_PATH)

    @allure.title("Bundled SimpleMAC model parses with its roles and formats")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_load_simplemac(self, simplemac):
        with allure.step("Check declarations"):
            assert simplemac.name == "SimpleMAC"
            assert simplemac.roles() == ["Client", "Server"]
            assert sorted(simplemac.formats.names()) == ["data", "payload"]
            assert simplemac.functions["hmac"].arity == 2

        with allure.step("Let bindings of the Server rule stay unexpanded in the AST"):
            server = simplemac.rule("Server")
            assert [label for label, _ in server.lets] == ["p", "hp"]
            assert isinstance(dict(server.lets)["p"], FormatApp)

    @allure.title("Printed model parses back to the same text")
    @allure.severity(allure.severity_level.NORMAL)
    def test_print_parse(self, simplemac):
        printed = print_spec(simplemac)
        allure.attach(printed, name="Printed model", attachment_type=allure.attachment_type.TEXT)

        with allure.step("Parse the printed text"):
            again = parse_spec(printed)

        assert print_spec(again) == printed
        assert [r.name for r in again.rules] == [r.name for r in simplemac.rules]
        assert sorted(again.formats.names()) == sorted(simplemac.formats.names())

    @allure.title("Quoted literals become raw bytes or ASCII")
    @allure.severity(allure.severity_level.NORMAL)
    def test_literals(self):
        spec = parse_spec("rule R: [ In(x) ] --[ A('0x02', 'secret') ]-> [ ]")
        action = spec.rule("R").actions[0]
        assert action.args == (PubName(b"\x02"), PubName(b"secret"))

    @allure.title("#ifdef sections follow the active flags")
    @allure.severity(allure.severity_level.NORMAL)
    def test_ifdef(self):
        source = "functions: h/1\n#ifdef EXTRA\nfunctions: g/1\n#else\nfunctions: f/1\n#endif\n"

        with allure.step("Without EXTRA the #else branch is used"):
            assert set(parse_spec(source, flags=[]).functions) == {"h", "f"}

        with allure.step("With EXTRA the #ifdef branch is used"):
            assert set(parse_spec(source, flags=["EXTRA"]).functions) == {"h", "g"}

    @allure.title("Preprocessing keeps line numbers")
    @allure.severity(allure.severity_level.MINOR)
    def test_preprocess_keeps_lines(self):
        source = "a\n#ifdef NO\nb\n#endif\nc"
        assert preprocess(source, []) == "a\n\n\n\nc"
        with pytest.raises(SpecSyntaxError):
            preprocess("#ifdef X\n", [])

    @allure.title("Flags come from MONITOR, the environment and the caller")
    @allure.severity(allure.severity_level.MINOR)
    def test_active_flags(self):
        flags = active_flags(["CLI"], environ={Config.FLAGS_ENV_VAR: "A, B"})
        assert flags == {"MONITOR", "A", "B", "CLI"}

    @allure.title("Syntax errors report the line of the original file")
    @allure.severity(allure.severity_level.NORMAL)
    def test_syntax_error_line(self):
        source = "theory T\nbegin\n/* comment\n spanning */\nrule R: [ In(x) ] --> [ Out(x)\nend\n"
        with pytest.raises(SpecSyntaxError) as error:
            parse_spec(source)
        allure.attach(str(error.value), name="Error", attachment_type=allure.attachment_type.TEXT)
        assert error.value.line is not None and error.value.line >= 5

    @allure.title("Declaration errors are reported")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("source,error", [
        ("rule R: [ In(x) ] --> [ Out(h(x)) ]", UndeclaredSymbolError),
        ("functions: h/1\nrule R: [ In(x) ] --> [ Out(h(x, x)) ]", ArityError),
        ("functions: h/1, h/2", ArityError),
        ("functions: h/1, h/1", DuplicateSymbolError),
        ("functions: receive/0", DuplicateSymbolError),
        ("rule R: [ In(x) ] --> [ ]\nrule R: [ In(x) ] --> [ ]", DuplicateSymbolError),
        ("rule R: [ A(x) ] --> [ A(x, x) ]", ArityError),
        ("hello", SpecSyntaxError),
    ])
    def test_declaration_errors(self, source, error):
        with pytest.raises(error):
            parse_spec(source)

    @allure.title("Verification-only blocks are kept aside")
    @allure.severity(allure.severity_level.MINOR)
    def test_lemma_blocks_skipped(self):
        spec = parse_spec("rule R: [ In(x) ] --> [ ]\nlemma secret:\n  \"All x #i. K(x) @ i ==> F\"\n")
        assert [b.keyword for b in spec.extra_blocks] == ["lemma"]
        assert len(spec.rules) == 1


@pytest.mark.spec
@allure.feature('Specification')
@allure.story('Elaboration and Lints')
class TestElaboration:

    @pytest.fixture
    def simplemac(self):
        return load_spec(Config.SIMPLEMAC_SPEC_PATH)

    @allure.title("Server role keeps the Setup rule and expands let bindings")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_elaborate_server(self, simplemac):
        elaboration = elaborate(simplemac, "Server")

        with allure.step("Selected rules"):
            assert [r.name for r in elaboration.rules] == ["Setup", "Server"]

        with allure.step("Eq action compares the received and recomputed HMAC"):
            server = elaboration.rules[1]
            (left, right), = server.equalities
            assert left == Variable("h")
            assert isinstance(right, App) and right.symbol.name == "hmac"
            assert isinstance(server.premise[1].args[0], FormatApp)

        with allure.step("Printed rule shows the constraint"):
            printed = print_rules(elaboration.rules)
            allure.attach(printed, name="Rules", attachment_type=allure.attachment_type.TEXT)
            assert "Eq(h, hmac(k, data('0x02', m)))" in printed

    @allure.title("Unknown role lists the available roles")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_unknown_role(self, simplemac):
        with pytest.raises(UnknownRoleError) as error:
            elaborate(simplemac, "Attacker")
        assert error.value.available == ("Client", "Server")
        assert "Client, Server" in str(error.value)

    @allure.title("SimpleMAC lints flag thread ids but not its formats")
    @allure.severity(allure.severity_level.NORMAL)
    def test_simplemac_lints(self, simplemac):
        report = elaborate(simplemac, "Server").report
        allure.attach("\n".join(str(l) for l in report), name="Lints", attachment_type=allure.attachment_type.TEXT)
        assert "formats-not-disjoint" not in report.codes()
        assert "role-thread-id" in report.codes()
        assert "emsr-shape" not in report.codes()

    @allure.title("Two triggers are fatal only in a monitored rule")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_two_triggers(self):
        spec = parse_spec(TWO_TRIGGERS)

        with allure.step("Other role: lint"):
            report = elaborate(spec, "Server").report
            assert [l.rule for l in report.by_code("emsr-shape")] == ["Bad"]

        with allure.step("Own role: error"):
            with pytest.raises(RuleShapeError):
                elaborate(spec, "Client")

    @allure.title("Function application in a premise is not an extended rule")
    @allure.severity(allure.severity_level.NORMAL)
    def test_premise_function(self):
        spec = parse_spec("functions: h/1\nrule R: [ In(h(x)) ] --> [ ]")
        with pytest.raises(RuleShapeError):
            elaborate(spec)

    @allure.title("Identical hint patterns in two rules are not exclusive")
    @allure.severity(allure.severity_level.NORMAL)
    def test_hints_not_exclusive(self):
        report = elaborate(parse_spec(HINTS_TWICE)).report
        assert [l.rule for l in report.by_code("hints-not-exclusive")] == ["B"]

    @allure.title("Decomposition prefix and Setup shape are linted")
    @allure.severity(allure.severity_level.MINOR)
    def test_reserved_and_setup_lints(self):
        spec = parse_spec(
            "rule Setup: [ Fr(~k) ] --[ Leak(~k) ]-> [ !Setup(~k) ]\n"
            "rule R: [ ST_x(a) ] --> [ ]"
        )
        codes = elaborate(spec).report.codes()
        assert "setup-shape" in codes
        assert "reserved-fact" in codes

    @allure.title("Rewrite layers lint hints and ignore roles")
    @allure.severity(allure.severity_level.MINOR)
    def test_rewrite_mode(self):
        spec = parse_spec("mode: rewrite\nrule R [role=X]: [ ] --[ Hint('f', <x>, _) ]-> [ ]")
        assert spec.mode == MODE_REWRITE
        elaboration = elaborate(spec, "Y")
        assert [r.name for r in elaboration.rules] == ["R"]
        assert elaboration.report.codes() == ["rewrite-hints"]

    @allure.title("Emit actions are stored flat with the function name first")
    @allure.severity(allure.severity_level.NORMAL)
    def test_emit_flattened(self):
        spec = parse_spec("mode: rewrite\nrule R: [ ] --[ Trig('Sum', <d>, x), Emit('h', <d, d>, x) ]-> [ ]")
        rule = elaborate(spec).rules[0]
        assert rule.trigger.symbol == "Sum"
        (event,) = rule.events
        assert event.symbol == EMIT
        assert event.args == (PubName(b"h"), Variable("d"), Variable("d"), Variable("x"))
