"""Exception types shared across the package."""


class PdmTorusError(Exception):
    """Base class for all package errors."""


class DomainError(PdmTorusError, ValueError):
    """An argument lies outside the region where a map is defined."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class IntegrationDiverged(PdmTorusError, ArithmeticError):
    """The integrator produced a non-finite state."""

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class SolverError(PdmTorusError, RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularityError(DomainError):
    """A closed-form expression hit a vanishing denominator."""


class RangeError(DomainError):
    """No root exists; ``interval`` holds the attainable values."""

    def __init__(self, message, interval, where=None):
        super().__init__(message, where)
        self.interval = interval


class UnsupportedParameter(PdmTorusError, ValueError):
    pass
