class PacketScoreError(Exception):
    """Base class for errors raised by packetscore."""


class EmptyTrainingSet(PacketScoreError):
    """No measured periods were available to build a nominal profile."""


class ProfileConfigMismatch(PacketScoreError):
    """Profiles combined in one operation were built with different binning."""


class InvalidFraction(PacketScoreError, ValueError):
    """A discard fraction outside [0, 1]."""


class TraceFormatError(PacketScoreError, ValueError):
    """A trace row that does not parse; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonMonotoneTrace(TraceFormatError):
    """Timestamps went backwards within a trace."""
