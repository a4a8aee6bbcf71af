"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` used by the command-line front end.
"""


class LocalBenfordError(Exception):
    exit_code = 4


class InvalidInput(LocalBenfordError, ValueError):
    exit_code = 2


class SpecParseError(InvalidInput):
    """Raised by the sequence mini-language parser.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        if text:
            caret = " " * position + "^"
            message = f"{message}\n  {text}\n  {caret}"
        super().__init__(message)


class ShapeMismatch(InvalidInput):
    pass


class RefusalError(LocalBenfordError):
    """Computation refused because the result could not be trusted."""

    exit_code = 3


class PrecisionBudgetExceeded(RefusalError):
    pass


class DepthExceeded(RefusalError):
    pass


class ExceedsMaximum(RefusalError):
    pass


class NotSeekable(RefusalError):
    pass


class InsufficientN(RefusalError):
    pass


class CancellationOverflow(RefusalError):
    pass


class AmbiguousDigit(RefusalError):
    """A fraction lies too close to a digit threshold to decide the digit."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class InvariantViolation(LocalBenfordError):
    exit_code = 4
