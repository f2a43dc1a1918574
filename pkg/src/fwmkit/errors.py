"""Exception and warning types shared across the toolkit."""


class FwmkitError(Exception):
    """Base class for all toolkit errors."""


class RangeError(FwmkitError, ValueError):
    """A frequency or wavelength falls outside a model's validity range."""


class CalibrationError(FwmkitError, RuntimeError):
    """Dispersion calibration could not satisfy the requested targets."""


class BracketingError(FwmkitError, ValueError):
    """A root search band does not bracket a sign change."""


class AliasingError(FwmkitError, RuntimeError):
    """Spectral power reached the edge of the simulation grid."""


class StiffnessError(FwmkitError, RuntimeError):
    """An adaptive integrator underflowed its step size."""


class PeakNotFoundError(FwmkitError, LookupError):
    """No usable spectral peak inside the requested search window."""


class ConfigError(FwmkitError, ValueError):
    """A scenario config failed syntactic or semantic validation."""


class QuasiCWWarning(UserWarning):
    """The quasi-CW pulse-overlap approximation is degraded (L > walk-off)."""


class EstimatorRangeWarning(UserWarning):
    """An efficiency estimator returned a value outside [0, 1]."""
