"""Exception hierarchy shared across the toolkit."""


class LinesiftError(Exception):
    """Base class for all toolkit errors."""


class DiffParseError(LinesiftError):
    """Malformed unified diff; carries the 1-based offending line offset."""

    def __init__(self, message, line_offset=None):
        if line_offset is not None:
            message = f"{message} (diff line {line_offset})"
        super().__init__(message)
        self.line_offset = line_offset


class IntegrityError(LinesiftError):
    """Commit directory contents are inconsistent (snapshot vs diff, missing file, binary file)."""


class SourceSyntaxError(LinesiftError):
    """Source text does not conform to the supported grammar."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class UnsupportedConstructError(SourceSyntaxError):
    """Token is valid C but outside the supported subset."""


class AnalysisError(LinesiftError):
    """A graph analysis precondition was violated (e.g. exit unreachable)."""


class DegenerateModelError(LinesiftError):
    """Training data cannot produce a usable model (e.g. a single class)."""


class SessionError(LinesiftError):
    """Active-learning session state violation (unknown/stale ids, bad config)."""

    def __init__(self, message, offending_id=None):
        super().__init__(message)
        self.offending_id = offending_id
