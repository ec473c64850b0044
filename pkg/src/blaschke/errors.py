"""Exception hierarchy shared by all modules."""


class BlaschkeError(Exception):
    """Base class for all library errors."""


class DomainError(BlaschkeError, ValueError):
    """An argument violates a documented precondition (e.g. a point outside
    the open unit disk, or a parameter outside its admissible range)."""


class DegreeCapError(BlaschkeError):
    """An explicit (coefficient-level) representation would exceed the
    configured degree cap; only lazy chain evaluation is available."""


class NonconvergenceError(BlaschkeError):
    """An iterative routine failed to reach its tolerance.

    The offending last iterate, when available, is attached as ``last``.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class InconclusiveError(BlaschkeError):
    """A numerical classification could not be made at the configured
    resolution (e.g. all Taylor coefficients below threshold)."""


class RootFindingError(BlaschkeError):
    """Polynomial root extraction or polishing failed a consistency check.

    Carries the offending value as ``offender`` when one is identifiable.
    """

    def __init__(self, message, offender=None):
        super().__init__(message)
        self.offender = offender
