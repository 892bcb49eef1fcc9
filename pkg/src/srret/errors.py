"""Exception hierarchy for srret."""


class SrretError(Exception):
    """Base class for all library errors."""


class CoincidentPoints(SrretError, ValueError):
    """Observation and source points closer than the separation threshold.

    ``index`` identifies the offending donor when raised from an ensemble
    computation, otherwise it is ``None``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonUnitDipole(SrretError, ValueError):
    pass


class DegenerateEnsemble(SrretError, RuntimeError):
    pass


class EmptyGrid(SrretError, ValueError):
    pass


class AcceptorInsideSupport(SrretError, ValueError):
    pass


class AcceptorInsideSphere(SrretError, ValueError):
    pass


class BadShell(SrretError, ValueError):
    pass


class BadAngles(SrretError, ValueError):
    pass


class InvalidDistribution(SrretError, ValueError):
    pass
