"""Exception types raised by the placement and rate routines."""


class PinchingError(Exception):
    """Base class for all errors raised by this package."""


class ZeroDistance(PinchingError, ValueError):
    """A user coincides with an antenna, so the path loss is undefined."""


class OffWaveguide(PinchingError, ValueError):
    """A point that must lie on the waveguide line does not."""


class AntennaOffWaveguide(PinchingError):
    """A phase-aligned offset pushes an antenna past the far waveguide end."""


class NumericalFailure(PinchingError, ArithmeticError):
    """The offset solver could not bracket or converge on a root."""


class Infeasible(PinchingError):
    """The NOMA power budget cannot meet the minimum target rate."""


class IoFailure(PinchingError, OSError):
    """A result table could not be written."""
