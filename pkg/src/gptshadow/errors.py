"""Exception hierarchy shared by every module of the package."""


class GptError(Exception):
    """Base class for all errors raised by gptshadow."""


class DimensionMismatch(GptError, ValueError):
    pass


class NotSurjective(GptError, ValueError):
    pass


class NumericalFailure(GptError, ArithmeticError):
    """A certificate or witness failed its own post-check."""


class ValidationFailed(GptError, ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotTomographic(ValidationFailed):
    pass


class MissingUnitRow(GptError, ValueError):
    pass


class InconsistentTable(GptError, ValueError):
    """A linear extension of a generator assignment does not exist."""


class WitnessVerificationFailed(GptError, ArithmeticError):
    pass


class NotIdempotent(GptError, ValueError):
    pass


class NotDiscardPreserving(GptError, ValueError):
    pass


class NotPhysical(GptError, ValueError):
    pass


class UnknownName(GptError, KeyError):
    pass


class BadParams(GptError, ValueError):
    pass
