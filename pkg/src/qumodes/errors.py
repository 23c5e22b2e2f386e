"""Error types shared across the package."""


class UnphysicalStateError(ValueError):
    """A covariance matrix violates symmetry or the uncertainty bound."""


class DegenerateMeasurementError(ValueError):
    """Homodyne conditioning on an observable with (near) zero variance."""
