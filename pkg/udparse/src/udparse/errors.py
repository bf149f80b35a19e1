"""Exception hierarchy for the parsing adapter."""


class UdparseError(Exception):
    """Base class for all adapter errors."""


class ModelError(UdparseError):
    """Requested parser model is unknown or cannot be loaded."""


class RequestError(UdparseError):
    """Request file is missing, malformed, or contains no sentences."""
