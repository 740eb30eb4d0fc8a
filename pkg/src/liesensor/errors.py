"""Exception types shared across the package."""


class LieSensorError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(LieSensorError):
    """A file or payload does not match its declared format."""


class ChecksumError(DataFormatError):
    """A serialized artifact fails its integrity check (truncation, corruption)."""


class CascadeFormatError(DataFormatError):
    """A cascade XML file is malformed or uses an unsupported structure."""


class TrainingDivergedError(LieSensorError):
    """Training produced a non-finite loss."""
