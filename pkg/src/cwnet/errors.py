"""Exception types shared across the package."""


class CwnetError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatch(CwnetError):
    pass


class UnsupportedFormat(CwnetError):
    pass


class ImageTooSmall(CwnetError):
    pass


class OddDimension(CwnetError):
    pass


class OddChannelCount(CwnetError):
    pass


class NonPositiveDelta(CwnetError):
    pass


class EmptySequence(CwnetError):
    pass


class PatchTooLarge(CwnetError):
    pass


class DegenerateDenominator(CwnetError):
    pass


class WeightMissing(CwnetError):
    def __init__(self, name):
        super().__init__(f"archive is missing tensor {name!r}")
        self.name = name


class BadMagic(CwnetError):
    pass


class UnsupportedVersion(CwnetError):
    pass


class ChecksumMismatch(CwnetError):
    pass


class Truncated(CwnetError):
    pass
