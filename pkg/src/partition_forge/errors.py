"""Exception types raised across the package."""


class PartitionForgeError(Exception):
    """Base class for all package errors."""


class ParseError(PartitionForgeError, ValueError):
    """A text input could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(PartitionForgeError, ValueError):
    """Input parsed fine but violates a domain constraint."""


class EmptyGraphError(PartitionForgeError, ValueError):
    """Operation is undefined on a graph without edges."""
