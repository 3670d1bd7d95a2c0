"""Exception types raised by the certification toolkit."""


class SosError(Exception):
    """Base class for all toolkit errors."""


class ShapeMismatch(SosError, ValueError):
    pass


class NonOrthogonalBasis(SosError, ValueError):
    pass


class NonHermitian(SosError, ValueError):
    pass


class DimensionTooLarge(SosError, ValueError):
    pass


class IndexOutOfRange(SosError, IndexError):
    pass


class DegenerateGroundState(SosError):
    pass


class GapTooSmall(SosError):
    """A guide eigenvalue is too close to zero to define the tau operators."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class OverlapNotPositive(SosError):
    """The tau overlap matrix has a negative or singular direction."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class OddOrbitalCount(SosError, ValueError):
    pass


class RootFindFailure(SosError):
    pass


class Infeasible(SosError):
    pass
