"""Exception hierarchy shared by every module."""


class LimsupError(Exception):
    """Base class for all library errors."""


class HypothesisViolated(LimsupError):
    """A theorem's hypothesis does not hold for the supplied data."""


class PreconditionUnmet(LimsupError):
    """An operation's documented precondition fails."""


class PrecisionExhausted(LimsupError):
    """A value is indistinguishable from zero at the working precision."""


class UnattainableHeight(LimsupError):
    """The requested height is not a value of the ring's norm."""


class BudgetExceeded(LimsupError):
    """A work cap (cells, candidates) would be exceeded."""


class EmptyAdmissibleSet(LimsupError):
    """No exponent vector satisfies the admissibility constraints."""


class OutOfTableRange(LimsupError):
    """A tabulated function does not reach the requested value."""


class ParseError(LimsupError):
    """Malformed textual input.  ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ParseError):
    pass


class MissingRequired(ParseError):
    pass
