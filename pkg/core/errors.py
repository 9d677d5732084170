class QuarticLabError(Exception):
    """Base class for every numeric failure raised by the lab."""


class NonConvergence(QuarticLabError):
    """A series did not reach its tolerance within the escalation cap."""


class PoleAtNonPositiveInteger(QuarticLabError):
    pass


class NumericOverflow(QuarticLabError):
    pass


class QuadratureStall(QuarticLabError):
    """Quadrature error estimate stayed above tolerance at the maximal degree."""


class PrecisionLoss(QuarticLabError):
    """Estimated relative error exceeds what the working precision supports."""


class DegenerateDegree(QuarticLabError):
    """The Hankel minor H_{n-1} vanishes, so P_n does not have full degree."""

    def __init__(self, n: int, message: str | None = None):
        self.n = n
        super().__init__(message or f"H_{n - 1} vanishes; P_{n} is not of full degree")


class Inconclusive(QuarticLabError):
    pass


class OnCutError(QuarticLabError):
    """Point lies on a branch cut and no side was requested."""


class OffCutError(QuarticLabError):
    pass


class StepLimit(QuarticLabError):
    pass


class NearPole(QuarticLabError):
    pass


class RootRefinementFail(QuarticLabError):
    pass


class SeedZero(QuarticLabError):
    """The parabolic cylinder seed vanishes at the requested point."""


class DivisionByZeroComponent(QuarticLabError):
    pass


class IndeterminateTransformation(QuarticLabError):
    """A Bäcklund step divides by a quantity that vanishes at this point."""


class RefinementFail(QuarticLabError):
    pass
