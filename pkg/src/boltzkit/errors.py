"""Exception hierarchy shared by all boltzkit modules.

Each exception carries the name of the module that raised it so CLI error
messages can point at the failing stage.
"""


class BoltzkitError(Exception):
    """Base class for all boltzkit errors."""

    def __init__(self, message, module=None):
        self.module = module
        super().__init__(f"{module}: {message}" if module else message)


class ParameterError(BoltzkitError, ValueError):
    """Invalid argument value (bad factor, zero count, malformed schedule...)."""


class DimensionError(BoltzkitError, ValueError):
    """Mismatched array dimensions between a model and its inputs."""


class CapacityError(BoltzkitError):
    """Request exceeds a hard resource cap (exhaustive enumeration size)."""


class NumericError(BoltzkitError, ArithmeticError):
    """Non-finite value produced where a finite one is required."""


class CalibrationError(BoltzkitError):
    """Effective-temperature calibration failed or is incompatible."""


class InsufficientOverlapError(CalibrationError):
    """Two energy histograms share too few populated bins for a log-ratio fit."""


class FormatError(BoltzkitError):
    """Malformed input file (model JSON, sample CSV, IDX dataset)."""
