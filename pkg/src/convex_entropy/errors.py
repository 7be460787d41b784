"""Exception hierarchy shared by all modules."""


class ConvexEntropyError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpec(ConvexEntropyError, ValueError):
    pass


class BetaTooSmall(InvalidSpec):
    """The tail exponent does not give an integrable (or admissible) density."""


class IllConditioned(InvalidSpec):
    pass


class SingularCovariance(InvalidSpec):
    pass


class NotPositiveDefinite(InvalidSpec):
    pass


class MomentsUndefined(ConvexEntropyError):
    pass


class NoClosedForm(ConvexEntropyError):
    pass


class DivergentIntegral(ConvexEntropyError):
    pass


class DimensionTooHigh(ConvexEntropyError):
    pass


class NonConvergence(ConvexEntropyError):
    """A numerical routine missed its accuracy target.

    ``partial`` carries the best value obtained, when there is one.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ModeSearchFailed(NonConvergence):
    pass


class InversionFailed(NonConvergence):
    pass


class InnerQuadratureFailure(NonConvergence):
    pass


class NonIntegrable(ConvexEntropyError):
    pass


class SupportSamplingFailed(ConvexEntropyError):
    pass


class SamplerUnavailable(ConvexEntropyError):
    pass


class PreconditionViolated(ConvexEntropyError):
    pass


class RegimeViolated(ConvexEntropyError):
    pass


class CurveEvaluationFailed(ConvexEntropyError):
    pass


class DegenerateSpectrum(ConvexEntropyError):
    pass


class HorizonTooShort(ConvexEntropyError):
    pass


class UnsupportedFamily(ConvexEntropyError):
    pass


class KappaOutOfRange(ConvexEntropyError):
    pass


class ConditionViolated(ConvexEntropyError):
    pass


class DivergentMixingMoment(ConvexEntropyError):
    pass


class GridEvaluationFailed(ConvexEntropyError):
    pass
