"""Exception hierarchy shared by every rslab module."""


class RslabError(Exception):
    """Base class for all errors raised by rslab."""


class InvalidArgumentError(RslabError, ValueError):
    pass


class RangeError(RslabError, ValueError):
    """A requested index or cutoff lies outside the available table."""


class DomainError(RslabError, ValueError):
    pass


class FormatError(RslabError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AccuracyError(RslabError, ArithmeticError):
    """Quadrature or truncation did not reach the requested tolerance.

    ``estimate`` and ``error_bound`` carry the best available result so callers
    can decide whether it is usable anyway.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class NoStationaryPointError(DomainError):
    pass


class NoSolutionError(RslabError, ArithmeticError):
    pass


class WindowError(InvalidArgumentError):
    """Parameters fall outside the admissible (T, X) window of an estimate."""


class VerificationFailure(RslabError, AssertionError):
    pass
