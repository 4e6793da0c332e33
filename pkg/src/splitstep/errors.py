"""Exception hierarchy for splitstep.

Library code raises these; only the CLI turns them into exit codes.
"""


class SplitstepError(Exception):
    """Base class for every error raised by splitstep."""


class DimensionError(SplitstepError, ValueError):
    """Shapes do not conform (non-square operator, length mismatch, ...)."""


class NonFiniteError(SplitstepError, ValueError):
    """A matrix, vector or time value contains NaN or Inf."""


class SingularMatrixError(SplitstepError):
    """A pivot fell below the singularity threshold."""


class GridIncompatibleError(SplitstepError):
    """The intra-step grid spacing does not fit the step or the quadrature rule."""


class MissingFreezePolicyError(SplitstepError):
    """Time-dependent operators were used without a freeze policy."""


class ProblemError(SplitstepError, ValueError):
    """Invalid parameters for a test problem."""


class SingularPotentialError(ProblemError):
    """The radial interval reaches r <= 0 where l(l+1)/r**2 is unbounded."""


class InsufficientDataError(SplitstepError):
    """Not enough points above the error floor to fit an order."""


class StudyConfigError(SplitstepError, ValueError):
    """Invalid convergence study configuration."""
