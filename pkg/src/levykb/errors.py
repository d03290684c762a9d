"""Typed errors raised across the package."""


class LevykbError(Exception):
    """Base class for all package errors."""


class InvalidParameters(LevykbError):
    """Measure parameters outside their admissible ranges."""


class FiniteActivity(LevykbError):
    """The jump measure has finite total mass; no density machinery applies."""


class QuadratureFailure(LevykbError):
    """A numerical integral did not converge to the requested tolerance."""


class MonotonicityViolation(LevykbError):
    """Oscillating-exponent inversion produced a negative density beyond tolerance."""


class ConditionAViolated(LevykbError):
    """The upper/lower exponent ratio appears unbounded on the extended grid."""


class FloorViolated(LevykbError):
    """Growth-floor constant is non-positive or numerically degenerate."""


class BracketFailure(LevykbError):
    """Quasi-inverse bracketing exhausted its search range."""


class TruncationInsufficient(LevykbError):
    """Series truncation leaves more tail mass than the requested tolerance."""


class TruncationUnreachable(LevykbError):
    """No admissible frequency cutoff meets the truncation tolerance."""


class MaxOnBoundary(LevykbError):
    """A grid maximum sits on the grid boundary; enlarge the grid and retry."""


class NoFiniteConstants(LevykbError):
    """A bound fit failed to produce finite constants."""


class PreconditionFailed(LevykbError):
    """A tail-domination precondition is violated on the check grid."""


class DeltaTooCoarse(LevykbError):
    """Small-jump cutoff fails the Gaussian-substitution quality gate."""


class GridCoverageInsufficient(LevykbError):
    """Density grid does not cover the required sample range."""
