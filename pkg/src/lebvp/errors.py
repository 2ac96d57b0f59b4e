"""Exception and warning types raised across the package."""


class LEBVPError(Exception):
    """Base class for all package errors."""


class CenterMismatch(LEBVPError, ValueError):
    pass


class ZeroLeadingCoefficient(LEBVPError, ZeroDivisionError):
    pass


class OutsideTrustRadius(LEBVPError, ValueError):
    pass


class OutsideTrustRadiusWarning(UserWarning):
    pass


class InvalidEquation(LEBVPError, ValueError):
    """Coefficient data violates a structural requirement."""


class AmplitudeUndefined(LEBVPError, ValueError):
    """The singular-solution amplitude has no real value."""


class NoConstantSolution(LEBVPError, ValueError):
    pass


class DegenerateExpansion(LEBVPError, ValueError):
    """The leading coefficient of the expansion at x=1 vanishes."""


class ResonantParameter(LEBVPError, ValueError):
    """The x=1 recurrence hits a zero denominator (integer resonance)."""


class RecurrenceBreakdown(LEBVPError, ZeroDivisionError):
    pass


class DomainError(LEBVPError, ValueError):
    pass


class NonconstantR(LEBVPError, ValueError):
    pass


class NonConvergence(LEBVPError, RuntimeError):
    pass


class MatchDegraded(LEBVPError, RuntimeError):
    """A re-assembled global solution does not meet the mismatch tolerance."""


class InsufficientOscillations(LEBVPError, ValueError):
    pass
