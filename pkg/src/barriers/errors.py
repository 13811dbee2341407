"""Exception taxonomy shared by all barriers modules."""


class BarriersError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(BarriersError, ValueError):
    """Dimension/grade mismatch or an argument outside its contract."""


class DegenerateInputError(BarriersError, ValueError):
    """Rank-deficient or otherwise degenerate geometric input."""


class UnsupportedGradeError(BarriersError, ValueError):
    """Operation restricted to a specific exterior grade."""


class ZeroTangentError(BarriersError, ValueError):
    """A tangent vector that must be nonzero is (numerically) zero."""


class NotOnQuadricError(BarriersError, ValueError):
    """Homogeneous vector does not satisfy the quadric equation."""


class ChartDomainError(BarriersError, ValueError):
    """Point lies on (or too close to) the removed hyperplane of the chart."""


class InsufficientSamplingError(BarriersError, RuntimeError):
    """Too few samples survive filtering for a statistical check."""


class StalledFlowError(BarriersError, RuntimeError):
    """Gradient flow step size underflowed before meeting its tolerance."""


class ConfigError(BarriersError, ValueError):
    """Malformed experiment configuration."""
