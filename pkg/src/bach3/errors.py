"""Exception types raised by the verification engine."""


class Bach3Error(Exception):
    """Base class for all engine errors."""


class PointOutsideDomain(Bach3Error):
    """Evaluation point (or a finite-difference stencil around it) leaves the chart box."""


class MetricNotPositiveDefinite(Bach3Error):
    """Metric has a non-positive eigenvalue at the evaluation point."""


class OrderExceeded(Bach3Error):
    """A derivative of higher order than the configured budget was requested."""


class WrongVariance(Bach3Error):
    """Tensor slot has the wrong covariant/contravariant flag for the operation."""


class SlotOutOfRange(Bach3Error):
    """Index slot outside the tensor rank."""


class LapseNonPositive(Bach3Error):
    """Lapse function is not positive at an interior sample point."""


class GradientVanishes(Bach3Error):
    """|∇f| below the critical-point threshold; level-set quantities undefined."""


class NotLinearlyDependent(Bach3Error):
    """Electric field is not parallel to the lapse gradient at the point."""


class ParameterOutOfRange(Bach3Error):
    """Solution parameters violate a catalog inequality (message names it)."""


class NegativeDiscriminant(Bach3Error):
    """Derived frequency-squared (alpha² or beta²) is negative."""


class NoPositiveRoots(Bach3Error):
    """Lapse polynomial has no positive roots in the bracketed range."""


class EmptyGrid(Bach3Error):
    """Verification grid contains no points."""


class LapseVanishes(Bach3Error):
    """Lapse profile is non-positive inside the warped-product interval."""


class WarpingNonPositive(Bach3Error):
    """Warping function is non-positive inside the interval."""


class CriticalPoint(Bach3Error):
    """f'(r) = 0 where a regular-point formula is required."""


class EmptyScan(Bach3Error):
    """Parameter scan produced no valid rows."""
