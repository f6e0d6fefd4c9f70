"""Exception hierarchy shared by every layer of the library."""


class BKTowerError(Exception):
    """Base class for all library errors."""


class ConfigInvalid(BKTowerError, ValueError):
    pass


class HeightTooLarge(BKTowerError, ValueError):
    pass


class PrecisionExhausted(BKTowerError, ArithmeticError):
    """A result would carry no guaranteed p-adic or filtration digits."""


class DenominatorOverflow(BKTowerError, ArithmeticError):
    pass


class DepthExceeded(BKTowerError, IndexError):
    pass


class NotInS(BKTowerError, ValueError):
    pass


class NotInFil(BKTowerError, ValueError):
    pass


class InvalidModule(BKTowerError, ValueError):
    pass


class HeightExceeded(BKTowerError, ValueError):
    pass


class Incompatible(BKTowerError, ValueError):
    """A chain violates Frobenius compatibility at some level."""

    def __init__(self, message, level=None, residual=None):
        super().__init__(message)
        self.level = level
        self.residual = residual


class DescentInconclusive(BKTowerError):
    pass


class SchemaMismatch(BKTowerError, ValueError):
    pass


class ParseError(BKTowerError, ValueError):
    pass
