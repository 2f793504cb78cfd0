"""Exception types shared across the package."""


class PadicDynError(Exception):
    """Base class for all package-specific errors."""


class InputError(PadicDynError):
    """Invalid argument or unmet precondition supplied by the caller."""


class PreconditionError(InputError):
    """A documented precondition failed; carries the failing verdict when known."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NormalizationError(InputError):
    """A coefficient does not carry the p-power divisibility its index requires."""


class InternalCheckError(PadicDynError):
    """An internal cross-check that must hold by construction has failed."""
