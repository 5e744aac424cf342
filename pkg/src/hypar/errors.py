"""Exception hierarchy shared by all hypar modules."""


class HyparError(Exception):
    """Base class for every error raised by this package."""


class ModelParseError(HyparError):
    """Syntax error in a model file, with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(HyparError):
    """A structurally well-formed input violates a semantic invariant."""


class CapacityError(HyparError):
    """Per-accelerator working set exceeds the configured DRAM capacity."""


class TopologyMismatchError(HyparError):
    """Plan hierarchy depth does not match the topology's node count."""
