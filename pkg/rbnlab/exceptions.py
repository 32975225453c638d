"""Exceptions that are worth catching"""
from typing import Optional


class IncompatibleSpecs(Exception):
    """Parameters or configuration values will lead to problems when used."""

    key: Optional[str]
    line: Optional[int]

    def __init__(self, message: str, key: str = None, line: int = None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.key = key
        self.line = line


class UnknownConfigKey(IncompatibleSpecs):
    """A configuration key we do not know about."""

    pass


class MalformedFile(Exception):
    """A fixture, CTM table or config file cannot be parsed."""

    line: Optional[int]

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ShapeMismatch(Exception):
    """Data does not have the shape an operation needs."""

    pass


class StateSpaceTooLarge(Exception):
    """The full state space of a network would not fit the configured cap."""

    pass


class DegenerateSeries(Exception):
    """A measurement series carries no signal to work with (e.g. it is flat)."""

    pass


class InvalidCodeSequence(Exception):
    """A code sequence that no LZW encoder can have produced."""

    pass
