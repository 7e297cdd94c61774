class CurvettaError(Exception):
    """Base for every error raised on purpose by the services."""


class StructuralError(CurvettaError, ValueError):
    """Malformed input: duplicate ids, self-loops, multi-edges, bad generators."""


class DomainError(CurvettaError, ValueError):
    """Input is well formed but outside the domain of the operation."""


class PreconditionError(CurvettaError, ValueError):
    """A documented precondition of the operation does not hold."""


class InconsistencyError(CurvettaError, RuntimeError):
    """An internal cross-check failed. Signals a bug or a corrupted input."""
