"""Exception hierarchy shared by all twirlkit modules."""


class TwirlkitError(ValueError):
    """Base class for every error raised by twirlkit."""


class DimMismatch(TwirlkitError):
    pass


class DimensionTooLarge(TwirlkitError):
    pass


class NotHermitian(TwirlkitError):
    pass


class NotPSD(TwirlkitError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class TraceNotOne(TwirlkitError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NotTracePreserving(TwirlkitError):
    pass


class NotNormalized(TwirlkitError):
    pass


class NotConjSymmetric(TwirlkitError):
    pass


class NotPositive(TwirlkitError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InvalidGroup(TwirlkitError):
    pass


class InvalidRep(TwirlkitError):
    pass


class VariantMismatch(TwirlkitError):
    pass


class RepMismatch(TwirlkitError):
    pass


class IndexOutOfRange(TwirlkitError):
    pass


class NotCPTP(TwirlkitError):
    pass


class UnsupportedTwirl(TwirlkitError):
    pass


class InvalidState(TwirlkitError):
    pass


class MalformedInput(TwirlkitError):
    """Raised when a JSON document does not match the expected schema."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
