"""Exception types raised across the toolkit."""


class DigitMTError(Exception):
    """Base class for every error raised by this package."""


class FormatError(DigitMTError, ValueError):
    pass


class WrongMagic(FormatError):
    pass


class TruncatedFile(FormatError):
    pass


class DimensionMismatch(FormatError):
    pass


class LabelOutOfRange(FormatError):
    pass


class UnsupportedFormat(FormatError):
    pass


class MaxvalNot255(FormatError):
    pass


class ShapeMismatch(FormatError):
    pass


class ConfigError(DigitMTError, ValueError):
    """Malformed grid, levels or annotation file."""


class MalformedGrid(ConfigError):
    pass


class AllBlackImage(DigitMTError, ValueError):
    pass


class NonPositiveSigma(DigitMTError, ValueError):
    pass


class WrongImageSize(DigitMTError, ValueError):
    pass


class TooFewVertices(DigitMTError, ValueError):
    pass


class DegenerateSegment(DigitMTError, ValueError):
    pass


class EmptyDataset(DigitMTError, ValueError):
    pass


class EmptyReference(DigitMTError, ValueError):
    pass


class SutError(DigitMTError):
    """Failure talking to or validating a classifier."""


class ProcessSpawnFailure(SutError):
    pass


class ProtocolViolation(SutError):
    pass


class Timeout(SutError):
    pass


class NoValidSeeds(DigitMTError):
    pass


class MissingAnnotations(DigitMTError):
    pass


class InconsistentReports(DigitMTError):
    pass


class IoFailure(DigitMTError, OSError):
    pass
