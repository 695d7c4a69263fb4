# stable_core/errors.py

class GibbsDivError(Exception):
    """
    Базовая ошибка библиотеки

    Args:
        message: Текст ошибки
        details: Диагностика (оценки погрешности, параметры и т.п.)
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    def to_dict(self):
        """Машиночитаемое представление (для stderr в CLI)"""
        return {
            "error": self.message,
            "details": self.details,
            "type": type(self).__name__,
        }


class DomainError(GibbsDivError, ValueError):
    """Параметр или аргумент вне области определения"""


class TableRangeError(GibbsDivError, IndexError):
    """Запрос за пределами таблицы весов или сетки"""


class NumericError(GibbsDivError, ArithmeticError):
    """Квадратура не сошлась даже после уточнения"""


class PrecisionError(NumericError):
    """Знакопеременная сумма потеряла слишком много значащих цифр"""


class TiltRangeError(NumericError):
    """Носитель табулированного наклона h слишком узок"""


class ConfigError(GibbsDivError):
    """Некорректная конфигурация запуска"""


class VerificationFailure(GibbsDivError):
    """Проверка инварианта не пройдена"""
