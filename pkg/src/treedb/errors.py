"""Exception hierarchy shared by all treedb components."""


class TreeDbError(Exception):
    """Base class for all treedb errors."""


class ConfigError(TreeDbError):
    """Invalid configuration (bad capacity, layout, flag combination)."""


class CapacityError(TreeDbError):
    """A fixed-size table ran out of room.

    The node table never resizes, so hitting the load-factor or
    probe-limit threshold aborts the run with a diagnostic instead of
    degrading into pathological probe times.
    """

    def __init__(self, message: str, entries: int = 0, capacity: int = 0):
        super().__init__(message)
        self.entries = entries
        self.capacity = capacity


class InvalidReferenceError(TreeDbError):
    """A reference does not point at an occupied, published entry."""


class ModelParseError(TreeDbError):
    """Syntax error in a guarded-command model file."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class DomainError(TreeDbError):
    """A model update produced a value outside the declared slot domain."""
