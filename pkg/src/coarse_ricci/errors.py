"""Exception hierarchy shared by every module."""


class CoarseRicciError(Exception):
    """Base class for all structured errors raised by the package."""


class MetricViolation(CoarseRicciError, ValueError):
    """The distance matrix does not satisfy the metric axioms."""


class InvalidMeasure(CoarseRicciError, ValueError):
    pass


class InvalidKernel(CoarseRicciError, ValueError):
    pass


class GeneratorViolation(CoarseRicciError, ValueError):
    """Negative jump rate or a row that does not sum to zero."""


class Reducible(CoarseRicciError, ValueError):
    """The rate graph has more than one communicating class."""


class SamePoint(CoarseRicciError, ValueError):
    """Curvature requested between a state and itself."""


class GridTooCoarse(CoarseRicciError, ValueError):
    pass


class NotEpsilonGeodesic(CoarseRicciError, ValueError):
    pass


class NoPositiveCurvature(CoarseRicciError, ValueError):
    pass


class NotReversible(CoarseRicciError, ValueError):
    pass


class ZeroVector(CoarseRicciError, ValueError):
    pass


class ChainSpecError(CoarseRicciError, ValueError):
    """Malformed chain-spec JSON document."""


class NotErgodicWarning(UserWarning):
    """Spectral gap is zero within tolerance."""


class ShortTimeWarning(UserWarning):
    """Time grid goes below the point where r(t) keeps significant digits."""
