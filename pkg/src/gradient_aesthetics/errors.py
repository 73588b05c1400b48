"""Exception hierarchy shared by every module."""


class AestheticsError(Exception):
    """Base class for all package errors."""


class DataError(AestheticsError):
    """Input data could not be used (bad file, degenerate histogram, ...)."""


class UnsupportedFormat(DataError):
    pass


class MalformedImage(DataError):
    pass


class ImageTooSmall(DataError):
    pass


class EmptyHistogram(DataError):
    pass


class DegenerateEnergy(DataError):
    pass


class TooFewLevels(DataError):
    pass


class DegenerateFit(DataError):
    pass


class OutOfRange(DataError, ValueError):
    pass


class CorruptArchive(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class NoSharedBins(DataError):
    """Two labeled corpora have no energy bin in common."""
