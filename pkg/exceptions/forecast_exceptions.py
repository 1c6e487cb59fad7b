"""
Exceptions raised by the forecasting toolkit.
"""


class CdfmError(Exception):
    """Base class for toolkit errors; carries the process exit code."""

    exit_code = 1


class DataLoadError(CdfmError):
    """Raised when a CSV row or cell cannot be ingested."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        super().__init__(message)


class DataFormatError(DataLoadError):
    """Raised when the file layout itself is wrong (header, column count)."""


class ConstantChannelError(CdfmError):
    """Raised when a channel has zero spread where a scale is required."""

    def __init__(self, message, channel=None):
        self.channel = channel
        super().__init__(message)


class ConfigError(CdfmError):
    """Raised for malformed or inconsistent configuration."""

    exit_code = 2


class UsageError(CdfmError):
    """Raised for invalid command-line usage."""

    exit_code = 2


class ShapeMismatchError(CdfmError):
    """Raised when array shapes disagree with the model or checkpoint."""


class DomainError(CdfmError):
    """Raised when an argument lies outside a function's domain."""


class DegenerateDistributionError(CdfmError):
    """Raised when a sample has no spread."""


class InsufficientDataError(CdfmError):
    """Raised when too few samples are available."""


class TrainingError(CdfmError):
    """Raised on non-finite gradients or diverging validation loss."""

    def __init__(self, message, epoch=None, parameter=None):
        self.epoch = epoch
        self.parameter = parameter
        super().__init__(message)


class CheckpointError(CdfmError):
    """Raised when a checkpoint document cannot be parsed."""
