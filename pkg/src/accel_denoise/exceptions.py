"""Exception hierarchy shared by all modules.

Every class derives from a builtin so callers that only know about
``ValueError`` / ``OSError`` keep working.
"""


class AccelDenoiseError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(AccelDenoiseError, ValueError):
    """An argument violates an operation's precondition."""


class InvalidDataError(AccelDenoiseError, ValueError):
    """Input data is structurally valid but unusable (empty, constant, ...)."""


class ParseError(InvalidDataError):
    """A data file does not match the expected schema.

    Parameters
    ----------
    message : str
        Human readable description.
    path : str, optional
        File being parsed.
    line : int, optional
        1-based line number of the offending row.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class DivergenceError(AccelDenoiseError, ArithmeticError):
    """Training produced a non-finite loss."""


class ConfigError(AccelDenoiseError, ValueError):
    """A run configuration is malformed."""
