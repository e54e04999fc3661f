"""
Exception hierarchy for spinchain-qst.

The CLI turns ConfigError into exit code 2 and every other QSTError into 3.
"""


class QSTError(Exception):
    """Base class for all library errors"""


class ConfigError(QSTError):
    """Invalid run configuration"""


class ResourceLimitError(QSTError):
    """Requested register exceeds the configured dense limit"""


class InvalidStateError(QSTError):
    """A state, basis or site selection violates its invariants"""


class MeasurementError(QSTError):
    """A forced measurement outcome has (numerically) zero probability"""


class UnsupportedModelError(QSTError):
    """Operation is not defined for the requested chain model"""


class NumericalError(QSTError):
    """Numerical breakdown (eigendecomposition failure, loss of unitarity)"""
