"""Exception hierarchy shared by the library and the CLI."""


class MimoPncError(Exception):
    """Base class for all errors raised by mimopnc."""


class DegenerateChannel(MimoPncError, ValueError):
    """Channel matrix is (numerically) singular or has a vanishing column."""


class InvalidCoefficient(MimoPncError, ValueError):
    """PNC mapping was asked to work with an integer coefficient of zero."""


class ConfigError(MimoPncError, ValueError):
    pass


class NoCrossing(MimoPncError, ValueError):
    """A BER curve never reaches the requested target on its SNR grid."""


class ParseError(MimoPncError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IoError(MimoPncError, OSError):
    pass


class UsageError(MimoPncError):
    pass
