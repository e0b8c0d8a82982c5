"""Exception and warning types shared across the package."""


class KSEnergyError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPointError(KSEnergyError):
    """A point does not belong to the target space (wrong shape/dimension)."""


class InvalidDomainError(KSEnergyError):
    """Degenerate or inconsistent domain description."""


class InvalidDirectionError(KSEnergyError):
    """A direction vector required to be nonzero (or unit) is not."""


class UnsupportedDimensionError(KSEnergyError):
    """Requested quadrature dimension is not supported."""


class MapEvaluationError(KSEnergyError):
    """The map evaluator failed; carries the offending point(s)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class StencilRangeError(KSEnergyError):
    """A finite-difference stencil leaves the evaluable region."""


class OutOfInnerDomainError(KSEnergyError):
    """A point lies outside the eroded inner domain required by the operation."""


class ExtrapolationDataError(KSEnergyError):
    """Not enough (h, value) pairs to extrapolate."""


class ConfigError(KSEnergyError):
    """Invalid run configuration (CLI exit code 2)."""


class EmptyMaskWarning(UserWarning):
    """Erosion produced an empty inner domain."""


class ExtrapolationWarning(UserWarning):
    """The h-sequence trend was too irregular for a trustworthy limit."""


class TruncationWarning(UserWarning):
    """Doubling the dense-anchor prefix still moved the energy noticeably."""
