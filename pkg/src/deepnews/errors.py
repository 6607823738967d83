"""Exception hierarchy shared by all pipeline modules."""

from __future__ import annotations


class DeepNewsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DeepNewsError, ValueError):
    """An argument fell outside the documented domain of an operation."""


class ParseError(DeepNewsError):
    """Input text could not be parsed; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConflictError(DeepNewsError):
    """Duplicate identifier found where uniqueness is required."""


class ValidationError(DeepNewsError):
    """A structural invariant of a domain value does not hold."""


class NotFoundError(DeepNewsError, LookupError):
    """A referenced entity does not exist in the given collection."""


class CycleError(ValidationError):
    """A graph expected to be acyclic contains a cycle."""


class PlanningError(DeepNewsError):
    """Outline planning could not satisfy its contract."""


class DecompositionError(PlanningError):
    """A section had no evidence to decompose into blocks."""


class ScopingError(PlanningError):
    """Referenced evidence could not be placed into any context window."""


class TemplateError(DeepNewsError):
    """A prompt template slot could not be resolved."""


class BackendError(DeepNewsError):
    """Generation backend transport failure (after retries)."""


class GenerationError(DeepNewsError):
    """Section generation failed; carries partial state when available."""

    def __init__(self, message: str, partial: tuple = ()):
        self.partial = partial
        super().__init__(message)


class AssemblyError(DeepNewsError):
    """Article assembly was handed an incomplete set of sections."""


class ConfigError(DeepNewsError):
    """Run configuration is invalid; maps to CLI exit code 2."""


class GateFailure(DeepNewsError):
    """The minimum-viable-context gate blocked the run; CLI exit code 3."""
