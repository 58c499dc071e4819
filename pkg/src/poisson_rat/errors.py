"""Exception types raised across the package."""


class PoissonRatError(ValueError):
    """Base class for every error raised by poisson_rat."""


# rational maps
class EmptyInput(PoissonRatError):
    pass


class DuplicatePole(PoissonRatError):
    pass


class ZeroResidue(PoissonRatError):
    pass


class EvalAtPole(PoissonRatError):
    pass


class UnsupportedOrder(PoissonRatError):
    pass


class RepeatedRoot(PoissonRatError):
    pass


class NonConvergedRoots(PoissonRatError):
    pass


class SamplingExhausted(PoissonRatError):
    pass


# quadrature and brackets
class NonConvergent(PoissonRatError):
    """Quadrature hit its node cap, or two independent routes disagree."""


class ExternalPointAtPole(PoissonRatError):
    pass


class EvalAtSingularity(PoissonRatError):
    pass


class CoincidentPQ(PoissonRatError):
    pass


class CoincidentPoints(PoissonRatError):
    pass


# tensors and charts
class LeibnizSolveFailure(PoissonRatError):
    pass


class DomainViolation(PoissonRatError):
    pass


class SingularJacobian(PoissonRatError):
    pass


class TooSmall(PoissonRatError):
    pass
