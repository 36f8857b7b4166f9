"""Exception hierarchy. The CLI maps each family to an exit code."""


class ThresholdBitsError(Exception):
    exit_code = 3


class DataError(ThresholdBitsError, ValueError):
    """Input data is malformed or violates a precondition."""

    exit_code = 1


class LabelNotBinary(DataError):
    pass


class EmptyCurve(DataError):
    pass


class ConfigError(ThresholdBitsError, ValueError):
    """Invalid parameters or configuration."""

    exit_code = 2


class InvariantError(ThresholdBitsError, RuntimeError):
    """An internal consistency check failed."""

    exit_code = 3
