"""Exception hierarchy.

Each family maps onto a CLI exit code: configuration problems exit with 1,
bad input data with 2 and numerical failures with 3.
"""


class LogLevelGGNNError(Exception):
    exit_code = 1


class ConfigError(LogLevelGGNNError, ValueError):
    exit_code = 1


class DataError(LogLevelGGNNError):
    exit_code = 2


class GraphFormatError(DataError, ValueError):
    """Malformed graph interchange document."""

    def __init__(self, message, line=None, column=None, offset=None):
        self.line = line
        self.column = column
        self.offset = offset
        if line is not None:
            message = f"{message} (line {line}, column {column}, byte {offset})"
        super().__init__(message)


class SourcePositionError(DataError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} at line {line}, column {column}"
        super().__init__(message)


class LexError(SourcePositionError):
    pass


class ParseError(SourcePositionError):
    pass


class RedactionError(DataError):
    pass


class ExtractionError(DataError):
    pass


class NumericError(LogLevelGGNNError, ArithmeticError):
    exit_code = 3
