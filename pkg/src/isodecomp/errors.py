class IsoDecompError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(IsoDecompError, ValueError):
    pass


class DegreeError(IsoDecompError, ValueError):
    pass


class PreconditionError(IsoDecompError):
    """An operation's input hypotheses do not hold (the message says which)."""


class SearchExhausted(IsoDecompError):
    """A budgeted search ended without a certificate.  Not a proof of absence."""


class NotCertified(IsoDecompError):
    pass


class InternalCheckError(IsoDecompError):
    """A postcondition verified before returning came out false.  Always a bug."""


class FlattenError(IsoDecompError):
    def __init__(self, message, point=None, residual=None):
        super().__init__(message)
        self.point = point
        self.residual = residual
