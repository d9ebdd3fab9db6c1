"""Exception types raised by the library."""


class PseudoHError(ValueError):
    """Base class for all validation and domain errors."""


class DimensionMismatch(PseudoHError):
    pass


class AsymmetricMetric(PseudoHError):
    pass


class DegenerateMetric(PseudoHError):
    pass


class NonAntisymmetricStructure(PseudoHError):
    pass


class NonCentralInput(PseudoHError):
    pass


class DependentBasis(PseudoHError):
    pass


class ZeroVelocity(PseudoHError):
    pass


class WrongCausalClass(PseudoHError):
    pass


class CenterTooSmall(PseudoHError):
    pass


class DegenerateDenominator(PseudoHError):
    pass


class InconsistentMembership(PseudoHError):
    pass


class IntegratorFailure(RuntimeError):
    """Adaptive step size collapsed or the step budget ran out."""
