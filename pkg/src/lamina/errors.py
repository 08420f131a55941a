"""Exception types shared across the package."""


class LaminaError(Exception):
    """Base class for all package errors."""


class DomainError(LaminaError):
    """A documented precondition was violated by the caller."""


class NotFoundError(LaminaError):
    """A referenced object (leaf, gap, portrait) is absent."""


class IntegrityError(LaminaError):
    """An internal certainty was falsified; indicates a bug or a bad fixture."""


class ExcludedCaseError(LaminaError):
    """The input falls in the Siegel-capture class that the slice excludes."""


class PartialMapError(LaminaError):
    """A boundary-collapse map could not be resolved on all requested vertices."""

    def __init__(self, message, unresolved=()):
        super().__init__(message)
        self.unresolved = tuple(unresolved)


class ParseError(LaminaError):
    """Malformed textual or JSON input; carries a location hint."""
