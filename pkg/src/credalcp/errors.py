"""Exception hierarchy for the credalcp toolkit.

Two broad families matter for the CLI exit-code mapping: data errors
(malformed or inconsistent inputs, exit 3) and numeric errors (infeasible
or diverging computations, exit 4).
"""


class CredalError(Exception):
    """Base class for all credalcp errors."""


class CredalDataError(CredalError):
    """Malformed or inconsistent input data (CLI exit 3)."""


class CredalNumericError(CredalError):
    """Numerically infeasible or diverging computation (CLI exit 4)."""


class NegativeMass(CredalDataError):
    """A probability vector entry is below the -1e-12 tolerance."""


class NotNormalized(CredalDataError):
    """A probability vector's sum deviates from 1 by more than 1e-6."""


class DimensionMismatch(CredalDataError):
    """Operands have inconsistent numbers of classes or features."""


class InvalidConcentration(CredalNumericError):
    """A Dirichlet concentration parameter is not strictly above 1."""


class ResourceLimit(CredalNumericError):
    """A simplex grid would exceed the configured point-count cap."""


class NonFiniteLoss(CredalNumericError):
    """Training loss became NaN or infinite (bad learning rate)."""


class KindModelMismatch(CredalDataError):
    """Nonconformity kind does not match the supplied model type."""


class EmptyCalibration(CredalDataError):
    """Calibration requires at least one example."""


class EmptyTestSet(CredalDataError):
    """Coverage evaluation requires at least one test example."""


class InfeasibleNoise(CredalNumericError):
    """Noise adjustment requires alpha > delta."""


class MiscalibratedRate(CredalNumericError):
    """Predictor was not calibrated at the noise-adjusted rate."""


class UnsupportedDimension(CredalDataError):
    """Ternary rendering supports exactly three classes."""


class DataFormatError(CredalDataError):
    """A file does not follow the documented schema."""


class DegenerateAlphaWarning(UserWarning):
    """The quantile index exceeds the calibration size; threshold is +inf."""
