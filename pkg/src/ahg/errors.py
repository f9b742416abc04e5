"""Exception hierarchy.

Every domain failure raised by the package derives from :class:`AHGError`,
which the command line maps to exit code 1.
"""


class AHGError(Exception):
    """Base class for domain errors."""


class InvalidMatrix(AHGError, ValueError):
    pass


class RankDeficient(InvalidMatrix):
    pass


class FiberTooLarge(AHGError):
    pass


class EmptyFiber(AHGError):
    pass


class NotInFiber(AHGError, ValueError):
    pass


class DegenerateDimension(AHGError):
    pass


class NotInterior(AHGError):
    pass


class NoInteriorPoint(AHGError):
    pass


class MaxIterations(AHGError):
    pass


class NoPositiveEntry(AHGError, ValueError):
    pass


class MarginMismatch(AHGError, ValueError):
    pass


class SingularJacobian(AHGError):
    pass


class NonPositiveM(AHGError, ValueError):
    pass


class NonTerminating(AHGError, ValueError):
    pass
