"""Exception types shared across the package."""


class NetchangeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWeight(NetchangeError):
    """An edge weight is negative or otherwise not a valid nonnegative real."""


class EmptyGraph(NetchangeError):
    """A snapshot carries no edges, so there is no structure to embed."""


class NotSymmetric(NetchangeError):
    """A matrix required to be symmetric is not."""


class DegenerateShape(NetchangeError):
    """A configuration collapses after centering (zero Frobenius norm)."""


class DimensionError(NetchangeError):
    """A requested dimension change would truncate columns."""


class InvalidShape(NetchangeError):
    """A power-law shape parameter does not define a proper distribution."""


class InvalidProbability(NetchangeError):
    """A block probability falls outside [0, 1]."""


class EmptyPartition(NetchangeError):
    """A score partition needed for resampling is empty."""


class UndefinedTest(NetchangeError):
    """A statistical test has no informative observations (all ties)."""


class FormatError(NetchangeError):
    """An input file does not conform to the documented edge-list format."""
