"""Exception types shared across the package."""


class RevSynthError(Exception):
    """Base class for all errors raised by revsynth."""


class SingularMatrix(RevSynthError, ValueError):
    pass


class NotABijection(RevSynthError, ValueError):
    pass


class LengthMismatch(RevSynthError, ValueError):
    pass


class WidthMismatch(RevSynthError, ValueError):
    pass


class TooWide(RevSynthError, ValueError):
    """Wire count exceeds what a dense 2**n table can hold."""


class WireOutOfRange(RevSynthError, ValueError):
    pass


class EqualValues(RevSynthError, ValueError):
    pass


class DuplicateValues(RevSynthError, ValueError):
    pass


class ZeroValue(RevSynthError, ValueError):
    pass


class PatternOverlap(RevSynthError, ValueError):
    pass


class InsufficientPairs(RevSynthError):
    """Not enough admissible pairs could be selected from the support."""


class ParseError(RevSynthError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
