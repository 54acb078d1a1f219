"""Exception and warning types shared across the toolkit."""


class FloqmagError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(FloqmagError, ValueError):
    """A parameter is outside its documented domain."""


class ValidationError(FloqmagError, ValueError):
    """An input object violates a structural precondition
    (non-Hermitian matrix, unnormalized state, ...)."""


class NumericalError(FloqmagError, ArithmeticError):
    """A numerical routine failed or left its certified regime
    (eigensolver non-convergence, norm drift, ...)."""


class AnalysisError(FloqmagError, RuntimeError):
    """A fit or detection step has no valid answer on the given data
    (no asymptotic regime, all-undefined ratio curve, ...)."""


class FloqmagWarning(UserWarning):
    """Base class for toolkit warnings."""


class DegeneracyWarning(FloqmagWarning):
    """Quasi-energy gap below threshold; infinite-time average formula
    assumes a non-degenerate spectrum."""


class UnconvergedLimitWarning(FloqmagWarning):
    """A large-dimension extrapolation ran out of schedule before the
    requested tolerance was met."""


class TrustOrderWarning(FloqmagWarning):
    """Requested expansion order exceeds the rounding-certified range;
    results beyond trust_order are reported but unreliable."""


class ZeroSpacingWarning(FloqmagWarning):
    """A zero quasi-energy spacing produced a spacing ratio of 0."""


class BranchWrapWarning(FloqmagWarning):
    """An eigenphase of the principal matrix logarithm lies within 1e-6 of
    the branch seam at ±π; the continuity-in-period convention for the
    effective Hamiltonian may be violated there."""
