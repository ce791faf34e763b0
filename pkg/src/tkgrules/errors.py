"""Exception types raised across the package."""


class TkgError(Exception):
    """Base class for all package errors."""


class MalformedLine(TkgError, ValueError):
    def __init__(self, line_number, line, message="expected at least 4 fields"):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: {message}: {line!r}")


class UnparsableTimestamp(TkgError, ValueError):
    pass


class EmptyDataset(TkgError, ValueError):
    pass


class UnknownRelation(TkgError, KeyError):
    pass


class EmptyCandidateSet(TkgError, ValueError):
    pass


class NoHeadEdges(TkgError, ValueError):
    pass


class NoGroundings(TkgError, ValueError):
    pass


class TruthOutOfUniverse(TkgError, ValueError):
    pass


class ConfigError(TkgError, ValueError):
    pass
