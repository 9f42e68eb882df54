"""Exception hierarchy shared across the package."""


class PairProxError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PairProxError, ValueError):
    """Malformed or out-of-range input data."""


class ConfigError(PairProxError, ValueError):
    """Attribute schema, profile or run configuration is inconsistent."""


class TrainingError(PairProxError, RuntimeError):
    """A model cannot be fit on the supplied data."""


class MetricError(PairProxError, ValueError):
    """A metric is undefined for the supplied data."""
