"""Exception hierarchy. The CLI maps each family to an exit code."""


class GkdrError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DataError(GkdrError):
    """Input could not be read or parsed."""

    exit_code = 1


class EmptyFileError(DataError):
    pass


class MissingColumnError(DataError):
    pass


class ParseError(DataError):
    pass


class ConfigError(GkdrError, ValueError):
    """Invalid parameters, shapes or options."""

    exit_code = 2


class NumericalError(GkdrError, ArithmeticError):
    """A factorization or solve failed, or produced non-finite values."""

    exit_code = 3
