"""Exception types shared across the toolkit."""


class OntokitError(Exception):
    """Base class for all toolkit errors."""


class DataError(OntokitError):
    """Malformed, inconsistent, or out-of-contract input data."""


class NetworkError(OntokitError):
    """A remote service could not be reached or returned a bad response."""
