"""Exception hierarchy shared by all modules."""


class BRSError(Exception):
    """Base class for every error raised by the package."""


class PrecisionError(BRSError):
    """The requested computation does not fit the working precision."""


class BoundaryAmbiguity(PrecisionError):
    """A coordinate lies within 2**(-P/2) of a cell boundary but not on it.

    The decision cannot be trusted at the working precision ``P``.
    """

    def __init__(self, message, datum=None):
        super().__init__(message)
        self.datum = datum


class SingularBasis(BRSError):
    pass


class DegenerateCoefficient(PrecisionError):
    pass


class InjectivityViolation(BRSError):
    pass


class NonReturning(BRSError):
    pass


class CardinalityViolation(BRSError):
    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class EmptyColumn(BRSError):
    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class VerificationFailure(BRSError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
