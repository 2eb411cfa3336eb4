"""Exception types shared across the toolkit."""


class SingularModelError(ValueError):
    """Detector model with p0 + p1 = 1 on some qubit; the response map has no inverse."""


class NoDataError(ValueError):
    """Calibration data never exposes a qubit to the input value needed for a rate."""


class SettingMismatchError(ValueError):
    """Counts were taken in a measurement basis incompatible with the requested observable."""


class DegenerateMeanSpinError(ValueError):
    """Mean-spin denominator of the squeezing parameter is consistent with zero."""


class ResourceLimitError(RuntimeError):
    """Request exceeds a dense-array size guard (full-distribution or simulator paths)."""
