from typing import Optional

USAGE_ERROR = 2


class SftException(Exception):
    """
    Базовая ошибка предметной области.
    detail - человекочитаемое описание, exit_code - код завершения CLI.
    """

    exit_code: int = USAGE_ERROR

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class MissingLayer(SftException):
    pass


class UnsupportedLayer(SftException):
    pass


class OrderTooLarge(SftException):
    pass


class WindowTooLarge(SftException):
    pass


class NotFound(SftException):
    pass


class CellTooSmall(SftException):
    pass


class Overflow(SftException):
    pass


class ProductTooLarge(SftException):
    pass


class DimensionMismatch(SftException):
    pass


class LengthMismatch(SftException):
    pass


class OracleRejection(SftException):
    pass


class BudgetExceeded(SftException):
    pass


class InconsistentBits(SftException):
    pass


class BoundExceeded(SftException):
    pass


class ParseError(SftException):
    """
    Ошибка разбора файла; хранит номер строки и столбца (с единицы).
    """

    def __init__(self, detail: str, line: int = 0, column: int = 0):
        if line:
            detail = f"{detail} (строка {line}, столбец {column})"
        super().__init__(detail)
        self.line = line
        self.column = column
