"""Exception types shared by every module (the CLI maps them to exit codes)."""

from __future__ import annotations


class FormatError(ValueError):
    """Malformed input file or record.

    ``source`` and ``line`` locate the offending input when known.
    """

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class DomainError(ValueError):
    """Input is well formed but outside an operation's domain."""
