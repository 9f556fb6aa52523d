"""Exception hierarchy."""


class SemijoinError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SemijoinError):
    """A database, condition or expression is structurally invalid."""


class ParseError(SemijoinError):
    def __init__(self, message: str, line: int, column: int):
        self.message, self.line, self.column = message, line, column
        super().__init__(f"line {line}, column {column}: {message}")


class BudgetExceeded(SemijoinError):
    """Expression synthesis would exceed its configured size budget."""


class NoWinningMove(SemijoinError):
    """The spoiler has no winning move because the duplicator wins."""
