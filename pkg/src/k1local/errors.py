"""Shared error types and the AtPrecision sentinel."""


class KLocalError(Exception):
    """Base class for all errors raised by this package."""


class NotAUnit(KLocalError):
    """Operand is divisible by p where a unit is required."""


class ZeroWeight(KLocalError):
    """Weight j = 0: a^0 - 1 = 0, so no torsion order is defined."""


class PrimeMismatch(KLocalError):
    """Operands live over different primes or precisions."""


class PrecisionExhausted(KLocalError):
    """A torsion exponent could not be resolved below the working precision."""


class NotAComplex(KLocalError):
    """Composite of consecutive maps is nonzero."""


class TooLarge(KLocalError):
    """Brute-force computation exceeds the configured size caps."""


class Unsupported(KLocalError):
    """Request outside the families this package implements."""


class InconsistentTable(KLocalError):
    """Shipped differential data contradicts a rule it must satisfy."""


class TruncatedError(KLocalError):
    """Requested value depends on cells outside the computed window."""


class DataFileError(KLocalError):
    """A shipped JSON data file failed schema validation."""


class _AtPrecision:
    """Return value for 'zero at this precision': valuation >= N.

    Deliberately not a number; callers must branch on it explicitly.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "AtPrecision"

    def __bool__(self):
        return False


AtPrecision = _AtPrecision()
