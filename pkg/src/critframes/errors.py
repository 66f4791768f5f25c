"""Exception hierarchy.

Input problems derive from :class:`SpecError` (a ``ValueError``) so callers
can distinguish bad input from numerical failures, which derive from
:class:`SolverError`.
"""


class CritFramesError(Exception):
    pass


class SpecError(CritFramesError, ValueError):
    """Invalid body, norm, frame or argument."""


class NotPositiveDefinite(SpecError):
    pass


class ExponentOutOfRange(SpecError):
    pass


class NonSymmetricGaugeBody(SpecError):
    pass


class EmptySum(SpecError):
    pass


class ZeroDirection(SpecError):
    pass


class ZeroVector(SpecError):
    pass


class ZeroVectorAfterDisplacement(SpecError):
    pass


class DimensionMismatch(SpecError):
    pass


class DimensionUnsupported(SpecError):
    pass


class AmbiguousCanonicalForm(SpecError):
    pass


class OutOfStatedRange(SpecError):
    pass


class NotPrime(SpecError):
    pass


class SolverError(CritFramesError, ArithmeticError):
    pass


class DegenerateFrame(SolverError):
    pass


class DegenerateResult(DegenerateFrame):
    pass


class NoConvergence(SolverError):
    pass


class SingularJacobian(SolverError):
    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class NotCritical(SolverError):
    pass
