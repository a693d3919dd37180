"""Exception hierarchy shared by every gh_forge module."""


class GhForgeError(Exception):
    """Base class for all errors raised by gh_forge."""


class StructuralError(GhForgeError, ValueError):
    """Input has the wrong shape (dimension mismatch, malformed document)."""


class DomainError(GhForgeError, ValueError):
    """Input is well formed but outside the domain of the operation."""


class PreconditionError(GhForgeError, ValueError):
    """A mathematical precondition of the operation does not hold."""


class AmbiguityError(GhForgeError, ValueError):
    """Sampling is too coarse to decide the answer unambiguously."""


class ConstructionError(GhForgeError, RuntimeError):
    """A construction that must succeed did not.

    Raised when a built object fails its own certificate, e.g. a glued matrix
    that violates the triangle inequality or a walk search with no result.
    """
