"""Exception taxonomy shared by the whole package.

Every failure mode a caller might want to branch on gets its own class;
the CLI maps these onto distinct exit codes.
"""


class VlzError(Exception):
    """Base class for all vlz errors."""


class ConfigError(VlzError):
    """Invalid configuration value (block edge, lane width, radius, ...)."""


class DegenerateRangeError(VlzError):
    """Value range of the data is zero where a nonzero range is required."""


class BoundTooSmallError(VlzError):
    """Error bound too small for the data magnitude (quantizer overflow)."""

    def __init__(self, index: int, value: float, bound: float):
        self.index = index
        self.value = value
        self.bound = bound
        super().__init__(
            f"error bound too small for data magnitude: |data[{index}]| = "
            f"{value!r} overflows the quantizer at eb = {bound!r}"
        )


class CorruptStreamError(VlzError):
    """Code/outlier stream is internally inconsistent."""


class ContainerFormatError(VlzError):
    """Base class for malformed container files."""


class BadMagicError(ContainerFormatError):
    """File does not start with the VLZ1 magic."""


class UnsupportedVersionError(ContainerFormatError):
    """Container version not understood by this reader."""


class HeaderCrcError(ContainerFormatError):
    """Header CRC32 mismatch."""


class PayloadCrcError(ContainerFormatError):
    """Payload CRC32 mismatch."""


class SectionOffsetError(ContainerFormatError):
    """Section offsets are inconsistent with the container length."""


class SizeMismatchError(VlzError):
    """Raw input file size disagrees with the dimensions supplied."""
