"""Exception hierarchy shared by every stage of the pipeline."""


class DacflowError(Exception):
    """Base class for all toolkit errors."""


class EventError(DacflowError, ValueError):
    """An input record could not be turned into a valid domain object.

    ``line`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedRecord(EventError):
    pass


class MissingField(EventError):
    pass


class KindTargetMismatch(EventError):
    pass


class SelfInteraction(EventError):
    pass


class MalformedTimestamp(EventError):
    pass


class DuplicateSeed(EventError):
    pass


class EmptyInput(DacflowError, ValueError):
    pass


class ZeroSeeds(DacflowError, ValueError):
    pass


class UnknownUser(DacflowError, KeyError):
    pass


class UnreachableTarget(DacflowError, RuntimeError):
    pass


class ArchiveError(DacflowError, ValueError):
    """Aggregate archive is missing its header or was written by another version."""
