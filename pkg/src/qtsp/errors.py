"""Exception hierarchy shared by the solver, cloud and service layers."""


class QtspError(Exception):
    """Base class for all package errors."""


class FormatError(QtspError, ValueError):
    """Input text could not be parsed (e.g. ragged matrix rows)."""


class DomainError(QtspError, ValueError):
    """Input parsed but violates a mathematical precondition."""


class CapacityError(QtspError):
    """A size guard was exceeded (factorial enumeration, qubit budget, ...)."""


class ConfigError(QtspError, ValueError):
    """Invalid scenario or plan document."""


class UnknownDeviceError(QtspError, KeyError):
    pass


class UnknownTaskError(QtspError, KeyError):
    pass


class MissingObjectError(QtspError, KeyError):
    pass


class DuplicateObjectError(QtspError):
    """Object store keys are write-once."""
