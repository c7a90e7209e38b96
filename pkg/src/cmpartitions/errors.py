"""Exception types shared across the package."""


class CMPartitionsError(Exception):
    """Base class for all package-specific errors."""


class PrecisionExhausted(CMPartitionsError):
    """The adaptive precision ladder hit max_bits without two runs agreeing."""


class NumericOverflow(CMPartitionsError, ArithmeticError):
    """An operation produced a non-finite (inf/nan) component."""


class ZeroLeadingCoefficient(CMPartitionsError, ZeroDivisionError):
    """Inversion of a formal series whose leading coefficient vanishes."""


class FractionalPower(CMPartitionsError):
    """An eta quotient whose weight-shift exponent sum is not divisible by 24."""


class NotUpperHalfPlane(CMPartitionsError, ValueError):
    """A point evaluation was requested outside the upper half-plane."""


class NearSingularity(CMPartitionsError):
    """Evaluation too close to a zero of j, j-1728, E4 or E6 to be trusted."""


class NotNearIntegral(CMPartitionsError):
    """A quantity expected to round to an integer has residual above tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoFixingClass(CMPartitionsError):
    """No matrix class of the requested determinant fixes the CM point."""


class MultipleFixingClasses(CMPartitionsError):
    """More than one matrix class fixes the CM point (the form is special)."""
