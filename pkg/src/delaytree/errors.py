"""Error types shared across the pipeline.

DataError: bad input data (malformed files, invariant violations in feeds).
UsageError: the caller asked for something unsupported (bad flags, bad config).
Programming-contract violations (empty distributions, inconsistent counts)
raise plain ValueError.
"""


class DataError(Exception):
    """Raised when an input file or record violates the data contract."""

    def __init__(self, message, *, file=None, line=None):
        self.file = file
        self.line = line
        parts = []
        if file is not None:
            parts.append(str(file))
        if line is not None:
            parts.append(f"line {line}")
        prefix = ": ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class UsageError(Exception):
    """Raised when a command, format, or configuration value is not supported."""
