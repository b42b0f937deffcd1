"""Exception types shared across modules."""


class ParameterError(ValueError):
    """Invalid model or sampler parameters (bad shapes, indices, non-PD covariance)."""


class DomainError(ValueError):
    """Arguments outside the region where a formula or asymptotic regime applies."""


class DimensionError(DomainError):
    """Sample too short for the requested procedure, e.g. ``T <= (k + 1) N``."""


class DataError(ValueError):
    """Malformed input data (missing values, non-numeric cells)."""


class DegenerateSpectrumWarning(RuntimeWarning):
    """A covariance or regressor matrix was singular and a pseudo-inverse was used."""
