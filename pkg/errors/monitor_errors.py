"""
Exception hierarchy shared by every package.

Absence of a match is never an exception; these classes cover malformed
input, violated assumptions and aborted runs.
"""


class MonitorError(Exception):
    """Base class for all monitor errors"""


# Specification front end

class SpecError(MonitorError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class SpecSyntaxError(SpecError):
    pass


class DuplicateSymbolError(SpecError):
    pass


class ArityError(SpecError):
    pass


class UndeclaredSymbolError(SpecError):
    def __init__(self, symbol, message=None, line=None, column=None):
        self.symbol = symbol
        super().__init__(message or f"undeclared symbol '{symbol}'", line, column)


class MacroError(SpecError):
    pass


class UnknownRoleError(SpecError):
    def __init__(self, role, available):
        self.role = role
        self.available = tuple(available)
        listed = ", ".join(self.available) or "none"
        super().__init__(f"unknown role '{role}' (available roles: {listed})")


class RuleShapeError(SpecError):
    def __init__(self, rule, message):
        self.rule = rule
        super().__init__(f"rule {rule}: {message}")


class DecompositionError(SpecError):
    def __init__(self, rule, message):
        self.rule = rule
        super().__init__(f"cannot decompose rule {rule}: {message}")


# Format strings

class FormatError(MonitorError):
    pass


class FormatConstructionError(FormatError):
    pass


class FormatDisjointnessError(FormatError):
    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__(
            f"formats '{first}' and '{second}' both parse the same bitstring; "
            "format strings must be pairwise disjoint"
        )


class EvaluationError(MonitorError):
    pass


# Event wire format

class EventLineError(MonitorError):
    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"event line {line_number}: {message}")


# Monitoring

class MonitorAbort(MonitorError):
    """The run cannot continue; distinct from a protocol rejection"""


class WellFormednessError(MonitorAbort):
    def __init__(self, rule, event, hints):
        self.rule = rule
        self.event = event
        self.hints = tuple(hints)
        super().__init__(
            f"hints are not exclusive: event {event} matches {len(self.hints)} hints "
            f"of rule {rule} ({', '.join(self.hints)})"
        )


class LikelyStreamViolation(MonitorAbort):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"event {index}: random() returned {value.hex() or '<empty>'} twice; "
            "the event stream is not likely"
        )


class ConfigurationLimitExceeded(MonitorAbort):
    def __init__(self, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"{count} configurations exceed the limit of {limit}")


class NondeterministicRewriteError(MonitorAbort):
    def __init__(self, event, count):
        self.event = event
        self.count = count
        super().__init__(
            f"rewrite layer is nondeterministic: event {event} leaves {count} configurations"
        )


class EventRejected(MonitorError):
    def __init__(self, rejection):
        self.rejection = rejection
        super().__init__(f"event {rejection.index} rejected: {rejection.event}")
