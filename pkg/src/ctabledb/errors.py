"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class CTableError(Exception):
    """Base class for all engine errors."""


class ConditionError(CTableError):
    pass


class DnfBlowup(ConditionError):
    pass


class EnumerationCap(ConditionError):
    pass


class UnboundVariable(ConditionError):
    pass


class UnknownVariable(ConditionError):
    pass


class SchemaMismatch(CTableError):
    pass


class ColumnMismatch(CTableError):
    pass


class SetTooLarge(CTableError):
    pass


class ExecutionError(CTableError):
    pass


class UnknownTable(ExecutionError):
    pass


class UnknownColumn(ExecutionError):
    pass


class ArityMismatch(ExecutionError):
    pass


class UnknownLiteral(ExecutionError):
    pass


class Redeclaration(ExecutionError):
    pass


class CapacityError(CTableError):
    pass


class SyntaxProblem(CTableError):
    """Lexing or parsing failure carrying the offending source offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class LexError(SyntaxProblem):
    pass


class ParseError(SyntaxProblem):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        super().__init__(message, offset)
        self.expected = expected


class FormatError(CTableError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class VersionError(FormatError):
    pass
