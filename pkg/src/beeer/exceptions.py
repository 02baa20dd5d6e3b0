"""Exception hierarchy shared by the library and the CLI."""


class BeeerError(Exception):
    """Base class for all toolkit errors."""


class SizeMismatchError(BeeerError, ValueError):
    """Two rasters that must share an ImageSize do not."""


class UnknownInstanceError(BeeerError, KeyError):
    """An instance id was requested that is not present in the label map."""


class ConfigError(BeeerError, ValueError):
    """Invalid configuration values or config file contents."""


class DataError(BeeerError):
    """A file on disk is missing, unreadable or inconsistent.

    The offending path is kept on ``path`` so the CLI can report it.
    """

    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class BundleError(DataError):
    """Base class for prediction bundle decoding failures."""


class BadMagicError(BundleError):
    pass


class UnsupportedVersionError(BundleError):
    pass


class TruncatedBundleError(BundleError):
    def __init__(self, message, path=None, expected=None, actual=None):
        super().__init__(message, path)
        self.expected = expected
        self.actual = actual
