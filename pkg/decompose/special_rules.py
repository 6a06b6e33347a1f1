"""Rules binding the network and randomness events to In, Out and Fr facts"""
from typing import List

from config.config import Config
from protocol_spec.model import FR, IN, OUT, ExtendedRule, RuleKind
from terms.facts import Fact, Trigger
from terms.term import BitLit, Sort, Variable


def special_rules() -> List[ExtendedRule]:
    """``receive`` produces In(x), ``random`` produces Fr(k), ``send`` consumes Out(x)"""
    x = Variable("x")
    k = Variable("k", Sort.FRESH)
    return [
        ExtendedRule(
            name=f"special_{Config.RECEIVE}",
            conclusion=(Fact(IN, (x,)),),
            trigger=Trigger(Config.RECEIVE, (), x),
            origin=Config.RECEIVE,
            kind=RuleKind.SPECIAL,
        ),
        ExtendedRule(
            name=f"special_{Config.RANDOM}",
            conclusion=(Fact(FR, (k,)),),
            trigger=Trigger(Config.RANDOM, (), k),
            origin=Config.RANDOM,
            kind=RuleKind.SPECIAL,
        ),
        ExtendedRule(
            name=f"special_{Config.SEND}",
            premise=(Fact(OUT, (x,)),),
            trigger=Trigger(Config.SEND, (x,), BitLit(b"")),
            origin=Config.SEND,
            kind=RuleKind.SPECIAL,
        ),
    ]
