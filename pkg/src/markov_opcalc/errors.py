"""Exception types raised by the operator calculus."""


class OpCalcError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OpCalcError, ValueError):
    """A scalar argument lies on the support of the representing measure."""


class QuadratureError(OpCalcError):
    """An integrand produced a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DivergenceError(OpCalcError):
    """A moment integral is unstable under order doubling (diverges)."""


class SpectrumHitError(OpCalcError):
    """``tI - A`` is singular or numerically singular."""

    def __init__(self, message, t=None, rcond=None):
        super().__init__(message)
        self.t = t
        self.rcond = rcond


class NotInClassError(OpCalcError):
    """A matrix has spectrum on the interval that defines its operator class."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class CertificateMismatchError(OpCalcError):
    """A certificate does not cover the support of the symbol it is used with."""


class IllConditionedError(OpCalcError):
    """Eigenbasis is defective or too ill-conditioned for the eigen oracle."""


class PreconditionError(OpCalcError):
    """A hypothesis of a bound is not met by the supplied operands."""


class RadiusError(OpCalcError):
    """Perturbation parameter lies outside the guaranteed convergence disc."""


class ContourError(OpCalcError):
    """A contour crosses the spectrum or leaves the region of analyticity."""
