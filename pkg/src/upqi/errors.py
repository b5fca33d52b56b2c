"""Exception hierarchy for the upqi package."""


class UpqiError(ValueError):
    """Base class for every error raised by upqi."""


class NonFiniteError(UpqiError):
    pass


class NegativeError(UpqiError):
    pass


class OutOfRangeError(UpqiError):
    pass


class InvalidSettingError(UpqiError):
    """Phase offset is not an integer multiple of pi/2."""


class BadModeError(UpqiError):
    pass


class CutoffTooSmallError(UpqiError):
    """Truncated Fock space leaks more population than tolerated."""


class BadVarianceError(UpqiError):
    pass


class TooFewSamplesError(UpqiError):
    pass


class ZeroSeedError(UpqiError):
    """Signal protocol needs a non-zero coherent seed (alpha > 0)."""


class ZeroGainError(UpqiError):
    """No idler-to-signal coupling (g1*g2 == 0): the object is unobservable."""


class ParseError(UpqiError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKeyError(ParseError):
    pass


class FormatError(UpqiError):
    pass


class IncompleteGridError(FormatError):
    pass


class ValueOutOfRangeError(FormatError):
    pass
