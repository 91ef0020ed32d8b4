"""Exception hierarchy."""

__all__ = [
    "MZError",
    "DomainError",
    "DivergenceError",
    "TruncationError",
    "UnderdeterminedLayerError",
    "NumericError",
    "IllConditionedError",
    "ShapeError",
    "DegenerateFitError",
    "ConfigError",
]


class MZError(Exception):
    """Base class for all library errors."""


class DomainError(MZError, ValueError):
    """A point lies outside the basis domain."""


class DivergenceError(MZError, ValueError):
    """A series does not converge for the requested smoothness exponent.

    ``sup_sigma`` carries the supremal admissible exponent when known.
    """

    def __init__(self, msg, sup_sigma=None):
        super().__init__(msg)
        self.sup_sigma = sup_sigma


class TruncationError(MZError):
    """The truncation index is too small for the requested tail tolerance."""


class UnderdeterminedLayerError(MZError, ValueError):
    """A layer has fewer nodes than the dimension of the polynomial space."""


class NumericError(MZError, ArithmeticError):
    """Non-finite values or a violated structural identity."""


class IllConditionedError(MZError, ArithmeticError):
    """The lower frame bound is below the certification floor."""


class ShapeError(MZError, ValueError):
    """Array lengths do not match."""


class DegenerateFitError(MZError):
    """A rate fit has no usable variation."""


class ConfigError(MZError, ValueError):
    """Invalid experiment configuration."""
