"""Exception hierarchy.

Two families: :class:`ConfigError` for bad inputs (CLI exit code 2) and
:class:`NumericalError` for invariant breaches detected during a computation
(CLI exit code 3).
"""


class TDHOError(Exception):
    """Base class for all package errors."""


class ConfigError(TDHOError, ValueError):
    pass


class NumericalError(TDHOError, ArithmeticError):
    pass


# --- geometry / representations ---------------------------------------------

class NotOnHyperboloid(ConfigError):
    pass


class UnnormalizedGenerator(ConfigError):
    pass


class NonUnitInitialVector(ConfigError):
    pass


# --- model ---------------------------------------------------------------------

class AmbiguousNature(ConfigError):
    pass


class InvalidFamilyParams(ConfigError):
    pass


class UnsupportedFamily(ConfigError):
    pass


class NonMonotoneTime(ConfigError):
    pass


class InconsistentNature(ConfigError):
    pass


class InvalidGrid(ConfigError):
    pass


class InvalidU0(ConfigError):
    pass


class NonpositiveAction(ConfigError):
    pass


# --- numerical invariants ------------------------------------------------------

class DriftExceeded(NumericalError):
    pass


class GroupViolation(NumericalError):
    pass


class NoUnitEigenvalue(NumericalError):
    pass


class UncertaintyViolated(NumericalError):
    pass


class NegativeVariance(NumericalError):
    pass
