"""Exception hierarchy shared by the codec modules."""


class RqatError(Exception):
    """Base class for all codec errors."""


class InvalidArgumentError(RqatError, ValueError):
    pass


class CorruptDataError(RqatError, ValueError):
    """A bitstream or payload failed validation while decoding."""


class FormatError(CorruptDataError):
    """Bad magic bytes or unknown container version."""


class UnsupportedConfigurationError(RqatError, ValueError):
    pass


class NumericError(RqatError, ArithmeticError):
    """A non-finite value appeared during differentiation or optimization."""

    def __init__(self, message, layer=None):
        super().__init__(message)
        self.layer = layer


class TrainingError(RqatError, RuntimeError):
    """Training diverged; ``iteration`` holds the failing step."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
