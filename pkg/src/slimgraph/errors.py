"""Exception hierarchy for slimgraph."""


class SlimgraphError(Exception):
    """Base class for all slimgraph errors."""


class FormatError(SlimgraphError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SlimgraphError):
    """Input values violate a documented precondition."""


class ConnectivityError(SlimgraphError):
    """Graph (or subgraph) is not connected where connectivity is required."""


class StructureError(SlimgraphError):
    """Tree arrays are internally inconsistent (e.g. cyclic parent pointers)."""


class FactorizationError(SlimgraphError):
    """Grounded Laplacian could not be factorized (usually a disconnected sparsifier)."""


class CapabilityError(SlimgraphError):
    """Request exceeds a documented size limit of a dense diagnostic."""
