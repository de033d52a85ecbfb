"""Exception hierarchy.

Split follows the CLI exit-code contract: configuration problems exit 2,
data/file problems exit 3.
"""


class CpeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CpeError):
    """Invalid configuration value or unusable combination of settings."""


class DataError(CpeError):
    """Invalid or inconsistent input data (manifests, embeddings, shapes)."""


class FormatError(DataError):
    """Malformed binary file: bad magic, bad header, truncated payload."""
