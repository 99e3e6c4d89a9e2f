"""Exception and warning types shared across the package."""


class EigenSeriesError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(EigenSeriesError):
    """Input matrix violates Hermitian symmetry beyond the tolerance."""


class InvalidSpec(EigenSeriesError):
    """Malformed model specification or matrix file."""


class DegenerateInput(EigenSeriesError):
    """Diagonal levels too close for the nondegenerate solver to apply."""


class PoleHit(EigenSeriesError):
    """A series denominator vanished (shifted level spacing below 1e-14)."""


class SingularSolve(EigenSeriesError):
    """A linear solve hit a (numerically) singular matrix."""


class NoRealRoot(EigenSeriesError):
    """The scalar level equation could not be bracketed on the real axis."""


class NotConverged(EigenSeriesError):
    """A truncated series did not meet its tail tolerance."""


class NoConvergence(EigenSeriesError):
    """Iterative eigensolver exceeded its sweep cap."""


class IllConditionedWarning(RuntimeWarning):
    """Linear system condition estimate above 1e12; results may lose digits."""


class AccuracyWarning(RuntimeWarning):
    """Evaluation entered a regime with known catastrophic cancellation."""
