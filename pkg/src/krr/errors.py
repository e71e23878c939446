"""Exception hierarchy.

Every error raised on bad data derives from :class:`KrrError`, so callers can
catch the whole family. The CLI maps :class:`DataError` subclasses to exit
code 1 and :class:`InputError` subclasses to exit code 2.
"""

__all__ = [
    "KrrError",
    "InputError",
    "DataError",
    "ParseError",
    "ValueParseError",
    "DuplicateCell",
    "EmptyReplication",
    "ReplicationMismatch",
    "BadReplicationCount",
    "IncompleteData",
    "ScaleMismatch",
    "AggregationTie",
    "BadRedundancy",
    "DegenerateData",
    "InsufficientPairs",
    "InsufficientDesign",
    "SBDomainError",
]


class KrrError(Exception):
    pass


class InputError(KrrError):
    """Malformed input or arguments that do not fit together."""


class DataError(KrrError):
    """Well-formed input on which the requested analysis is undefined."""


class ParseError(InputError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ValueParseError(ParseError, ValueError):
    """A cell value that does not parse under the declared scale."""


class DuplicateCell(InputError):
    pass


class EmptyReplication(DataError):
    pass


class ReplicationMismatch(InputError):
    def __init__(self, only_a=(), only_b=()):
        self.only_a = tuple(only_a)
        self.only_b = tuple(only_b)
        super().__init__(
            f"item sets differ: {len(self.only_a)} only in first "
            f"{list(self.only_a[:5])}, {len(self.only_b)} only in second "
            f"{list(self.only_b[:5])}"
        )


class BadReplicationCount(InputError):
    pass


class IncompleteData(DataError):
    pass


class ScaleMismatch(InputError):
    pass


class AggregationTie(DataError):
    pass


class BadRedundancy(InputError):
    pass


class DegenerateData(DataError):
    pass


class InsufficientPairs(DataError):
    pass


class InsufficientDesign(DataError):
    pass


class SBDomainError(DataError, ValueError):
    pass
