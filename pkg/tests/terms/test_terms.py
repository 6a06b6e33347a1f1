import itertools
import random
from collections import Counter

import pytest
import allure

from formats.body import define_format
from formats.registry import FormatRegistry
from terms.facts import Fact, FactMultiset, GroundFact, Trigger
from terms.matching import apply_subst, evaluate, mgs, multiset_match
from terms.substitution import EMPTY, Substitution
from terms.term import (
    App,
    BitLit,
    FormatApp,
    FunctionSymbol,
    PubName,
    Variable,
    pub_name_bytes,
    pub_name_literal,
    variables,
)
from engine.program_event import ProgramEvent
from errors.monitor_errors import EvaluationError

H = FunctionSymbol("h", 1)
F = FunctionSymbol("f", 2)
X = Variable("x")
Y = Variable("y")
Z = Variable("z")

ALPHABET = (b"a", b"b", b"c")
# symbol -> (arity, persistent)
SYMBOLS = {"A": (1, False), "B": (2, False), "K": (1, True)}


def _random_state(rng):
    facts = []
    for _ in range(rng.randint(0, 5)):
        symbol = rng.choice(sorted(SYMBOLS))
        arity, persistent = SYMBOLS[symbol]
        facts.append(GroundFact(symbol, tuple(rng.choice(ALPHABET) for _ in range(arity)), persistent))
    return FactMultiset(facts)


def _random_premise(rng):
    premise = []
    for _ in range(rng.randint(1, 3)):
        symbol = rng.choice(sorted(SYMBOLS))
        arity, persistent = SYMBOLS[symbol]
        args = tuple(PubName(b"a") if rng.random() < 0.2 else rng.choice((X, Y, Z)) for _ in range(arity))
        premise.append(Fact(symbol, args, persistent))
    return tuple(premise)


def _brute_force_matches(state, premise):
    """Every assignment of the premise variables that grounds the premise inside the state"""
    labels = [v.label for v in variables(*(a for f in premise for a in f.args))]
    found = set()
    for values in itertools.product(ALPHABET, repeat=len(labels)):
        assignment = dict(zip(labels, values))
        grounded = [
            GroundFact(f.symbol, tuple(assignment[a.label] if isinstance(a, Variable) else a.value for a in f.args),
                       f.persistent)
            for f in premise
        ]
        needed = Counter(f for f in grounded if not f.persistent)
        if all(state.count(f) >= n for f, n in needed.items()) and all(f in state for f in grounded if f.persistent):
            found.add(Substitution(assignment))
    return found


def _random_term(rng, depth):
    choice = rng.randrange(5) if depth > 0 else rng.randrange(2)
    if choice == 0:
        return rng.choice((X, Y, Z))
    if choice == 1:
        return PubName(b"k")
    if choice == 2:
        return App(H, (_random_term(rng, depth - 1),))
    if choice == 3:
        return App(F, (_random_term(rng, depth - 1), _random_term(rng, depth - 1)))
    return FormatApp("msg", (_random_term(rng, depth - 1),))


@pytest.mark.terms
@allure.feature('Terms')
@allure.story('Matching and Substitution')
class TestMatching:

    @pytest.fixture
    def formats(self):
        """Registry holding the length-prefixed msg format"""
        return FormatRegistry([define_format("msg", ["m"], "cat(byte(0x01), byte(l, 2), byte(m, l))")])

    @allure.title("Trigger pattern binds fresh variables to event arguments and result")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_mgs_binds_trigger_variables(self):
        event = ProgramEvent("h", (b"\xab",), b"\xcd")

        with allure.step("Match h(x) -> y against the event"):
            rho = mgs(event, Trigger("h", (X,), Y))

        with allure.step("Verify bindings"):
            assert rho == {"x": b"\xab", "y": b"\xcd"}

    @allure.title("Non-linear pattern does not match unequal arguments")
    @allure.severity(allure.severity_level.NORMAL)
    def test_mgs_non_linear_pattern(self):
        event = ProgramEvent("f", (b"\x01", b"\x02"), b"")
        assert mgs(event, Trigger("f", (X, X), None)) is None
        assert mgs(ProgramEvent("f", (b"\x01", b"\x01"), b""), Trigger("f", (X, X), None)) == {"x": b"\x01"}

    @allure.title("Event with another name or arity does not match")
    @allure.severity(allure.severity_level.NORMAL)
    def test_mgs_name_and_arity(self):
        assert mgs(ProgramEvent("g", (b"\x01",), b""), Trigger("h", (X,), Y)) is None
        assert mgs(ProgramEvent("h", (b"\x01", b"\x02"), b""), Trigger("h", (X,), Y)) is None

    @allure.title("Format pattern is matched by parsing the value")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_mgs_through_format(self, formats):
        pattern = FormatApp("msg", (Variable("m"),))

        with allure.step("Parse 0x010002cafe as msg(m)"):
            rho = mgs(bytes.fromhex("010002cafe"), pattern, formats)
            allure.attach(repr(rho), name="Substitution", attachment_type=allure.attachment_type.TEXT)

        with allure.step("Verify the message binding"):
            assert rho == {"m": b"\xca\xfe"}

        with allure.step("A wrong leading constant does not match"):
            assert mgs(bytes.fromhex("020002cafe"), pattern, formats) is None

    @allure.title("An instance of a pattern matches it under the instantiating bindings")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_mgs_of_instance(self, formats):
        rng = random.Random(11)

        with allure.step("500 random patterns and ground substitutions"):
            for _ in range(500):
                pattern = _random_term(rng, 3)
                sigma = Substitution({v.label: rng.randbytes(rng.randint(0, 3)) for v in variables(pattern)})
                ground = apply_subst(pattern, sigma, formats)
                rho = mgs(ground, pattern, formats)
                assert rho is not None, f"{pattern} does not match {ground}"
                assert all(rho[label] == sigma[label] for label in sigma)

    @allure.title("Bound variable must agree with the value")
    @allure.severity(allure.severity_level.NORMAL)
    def test_match_respects_existing_binding(self):
        subst = Substitution({"x": b"\x01"})
        assert mgs(b"\x01", X, subst=subst) is subst
        assert mgs(b"\x02", X, subst=subst) is None

    @allure.title("apply_subst instantiates bound variables only")
    @allure.severity(allure.severity_level.NORMAL)
    def test_apply_subst(self, formats):
        subst = Substitution({"x": b"\xaa"})

        assert apply_subst(App(H, (X,)), subst) == App(H, (BitLit(b"\xaa"),))
        assert apply_subst(Y, subst) == Y

        with allure.step("Fully bound format application becomes its bytes"):
            constructed = apply_subst(FormatApp("msg", (Variable("m"),)), Substitution({"m": b"\xca\xfe"}), formats)
            assert constructed == BitLit(bytes.fromhex("010002cafe"))

    @allure.title("Function applications have no runtime value")
    @allure.severity(allure.severity_level.NORMAL)
    def test_evaluate_rejects_function_application(self):
        with pytest.raises(EvaluationError):
            evaluate(App(H, (X,)), Substitution({"x": b"\x01"}))
        with pytest.raises(EvaluationError):
            evaluate(Y, EMPTY)


@pytest.mark.terms
@allure.feature('Terms')
@allure.story('Fact Multisets')
class TestFactMultiset:

    @pytest.fixture
    def state(self):
        return FactMultiset([
            GroundFact("A", (b"\x01",)),
            GroundFact("A", (b"\x01",)),
            GroundFact("A", (b"\x02",)),
            GroundFact("K", (b"\x09",), persistent=True),
        ])

    @allure.title("Linear premise facts use distinct occurrences")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_multiset_match_counts_occurrences(self, state):
        premise = (Fact("A", (X,)), Fact("A", (X,)))

        with allure.step("Two copies of A(0x01) satisfy A(x), A(x)"):
            matches = multiset_match(state, premise)
            assert matches == [Substitution({"x": b"\x01"})]

        with allure.step("A single copy does not"):
            single = state.remove([GroundFact("A", (b"\x01",))])
            assert multiset_match(single, premise) == []

    @allure.title("Persistent facts can be used any number of times")
    @allure.severity(allure.severity_level.NORMAL)
    def test_persistent_facts_are_not_consumed(self, state):
        premise = (Fact("K", (X,), persistent=True), Fact("K", (X,), persistent=True), Fact("A", (Y,)))
        matches = multiset_match(state, premise)
        assert {m["y"] for m in matches} == {b"\x01", b"\x02"}

    @allure.title("multiset_match finds exactly the brute-force assignments")
    @allure.severity(allure.severity_level.CRITICAL)
    def test_multiset_match_brute_force(self):
        rng = random.Random(5)

        with allure.step("1000 states of at most 5 facts and premises of at most 3 facts"):
            for _ in range(1000):
                state = _random_state(rng)
                premise = _random_premise(rng)
                expected = _brute_force_matches(state, premise)
                found = multiset_match(state, premise)
                assert len(found) == len(set(found))
                assert set(found) == expected, f"{premise} in {sorted(map(str, state))}"

    @allure.title("add and remove return new multisets")
    @allure.severity(allure.severity_level.NORMAL)
    def test_add_remove_are_pure(self, state):
        fact = GroundFact("B", (b"",))
        grown = state.add([fact])

        assert fact in grown and fact not in state
        assert grown.remove([fact]) == state
        assert hash(grown.remove([fact])) == hash(state)
        with pytest.raises(ValueError):
            state.remove([fact])

    @allure.title("Equality ignores insertion order")
    @allure.severity(allure.severity_level.MINOR)
    def test_equality_is_order_free(self):
        a = FactMultiset([GroundFact("A", (b"\x01",)), GroundFact("B", (b"\x02",))])
        b = FactMultiset([GroundFact("B", (b"\x02",)), GroundFact("A", (b"\x01",))])
        assert a == b and len(a) == 2


@pytest.mark.terms
@allure.feature('Terms')
@allure.story('Names and Variables')
class TestNames:

    @allure.title("Public name literals encode as ASCII or raw hex bytes")
    @allure.severity(allure.severity_level.CRITICAL)
    @pytest.mark.parametrize("literal,expected", [
        ("secret", b"secret"),
        ("0x02", b"\x02"),
        ("0x", b"0x"),
        ("0x0", b"0x0"),
        ("", b""),
    ])
    def test_pub_name_bytes(self, literal, expected):
        assert pub_name_bytes(literal) == expected

    @allure.title("Printing a public name gives back the same bytes")
    @allure.severity(allure.severity_level.MINOR)
    @pytest.mark.parametrize("value", [b"abc", b"\x02", b"0x12", b"it's"])
    def test_pub_name_literal_inverse(self, value):
        assert pub_name_bytes(pub_name_literal(value)) == value

    @allure.title("Variables are listed in order of first occurrence")
    @allure.severity(allure.severity_level.MINOR)
    def test_variables_order(self):
        term = App(F, (App(H, (Y,)), X))
        assert [v.label for v in variables(term, Y, PubName(b"a"))] == ["y", "x"]

    @allure.title("Application arity is checked")
    @allure.severity(allure.severity_level.MINOR)
    def test_app_arity(self):
        with pytest.raises(ValueError):
            App(F, (X,))
