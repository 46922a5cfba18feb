"""Exception hierarchy shared by all relayopt modules."""


class RelayOptError(Exception):
    """Base class for relayopt errors."""


class NotHermitian(RelayOptError, ValueError):
    pass


class NotPSD(RelayOptError, ValueError):
    pass


class NotPD(RelayOptError, ValueError):
    pass


class Singular(RelayOptError, ValueError):
    pass


class ConvergenceFailure(RelayOptError, RuntimeError):
    pass


class DimensionMismatch(RelayOptError, ValueError):
    pass


class InvalidRho(RelayOptError, ValueError):
    pass


class NonPositiveDenominator(RelayOptError, ValueError):
    """The eta scaling equation has no positive solution for the allocation."""
