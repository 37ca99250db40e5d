"""Exception types shared across the package."""


class TalbotLabError(Exception):
    """Base class for all package errors."""


class InvalidSpec(TalbotLabError):
    """A physical or numerical parameter is out of its valid range."""


class AliasingRisk(TalbotLabError):
    """The requested propagation would alias on the given grid."""


class GridMismatch(TalbotLabError):
    """Two sampled fields do not share the same grid."""


class UnderResolved(TalbotLabError):
    """The grid is too coarse for the structure it must represent."""


class BinMisalignment(TalbotLabError):
    """Detector bins cannot be laid out consistently on the grid."""


class NotCoprime(TalbotLabError):
    """The integers defining a fractional revival are not coprime."""


class NonNormalized(TalbotLabError):
    """A probability table does not sum to one."""
