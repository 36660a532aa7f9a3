from typing import Any


class HMFError(ValueError):
    """Base class for every error raised by the library.

    Subclasses ``ValueError`` so callers that only guard against bad input
    keep working. Extra keyword arguments are kept on ``context`` and shown
    in the message.
    """

    def __init__(self, message: str, **context: Any):
        self.message = message
        self.context = context
        if context:
            details = ", ".join(f"{key}={value}" for key, value in sorted(context.items()))
            message = f"{message} ({details})"
        super().__init__(message)


class ConfigError(HMFError):
    """A run configuration or descriptor could not be parsed or validated."""


class BasisFileError(HMFError):
    """A basis file is malformed or disagrees with its header."""


class UnsupportedError(HMFError):
    """The requested weight, ring or operation combination is not supported."""


class OutOfPrecisionError(HMFError):
    """A coefficient or operator needs more precision than the series carries."""


class BoundMismatchError(HMFError):
    """Two series disagree on bound, ring, field or class representatives."""


class NotInvertibleError(HMFError):
    """A series or ring element has no inverse."""


class InvalidRepresentativeError(HMFError):
    """A representative change scalar is not totally positive or maps wrongly."""


class InsufficientDataError(HMFError):
    """A character value is needed beyond the data it was built from."""


class CharacterConstructionError(HMFError):
    """A character cannot be consistently defined on the ideal group."""


class InvalidPrimeError(HMFError):
    """Reduction modulo a prime that is inverted or divides a denominator."""


class ValidationFailure(HMFError):
    """A check requested from the command line did not pass."""
