"""Exception hierarchy shared by the numerical modules."""


class HelmshapeError(Exception):
    """Base class for numerical failures."""


class GeometryError(HelmshapeError, ValueError):
    pass


class NonpositiveRadius(GeometryError):
    pass


class UnderResolved(HelmshapeError, ValueError):
    pass


class NotStarshaped(GeometryError):
    pass


class FitResidualExceeded(GeometryError):
    pass


class RegionIntersectsBoundary(GeometryError):
    pass


class IllConditioned(HelmshapeError):
    pass


class ResonanceIllConditioned(IllConditioned):
    pass


class NearBoundaryEvaluation(HelmshapeError, ValueError):
    pass


class NotSupported(HelmshapeError):
    pass


class NormalMismatch(HelmshapeError, ValueError):
    pass


class SpecialFunctionError(HelmshapeError, ArithmeticError):
    pass


class WrongRegion(HelmshapeError, ValueError):
    pass


class MissingExtras(HelmshapeError, ValueError):
    pass


class MissingSurfaceGradient(HelmshapeError, ValueError):
    pass


class MissingTrace(HelmshapeError, ValueError):
    pass


class MissingSecondTrace(MissingTrace):
    pass


class OutsideExtensionSupport(HelmshapeError, ValueError):
    pass


class LadderUnsolvable(HelmshapeError):
    pass


class SlopeUnstable(HelmshapeError):
    pass
