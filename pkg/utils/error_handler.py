import logging
import traceback
from config.settings import EXIT_OK, EXIT_RUNTIME_ERROR, EXIT_USAGE_ERROR
from exceptions.forecast_exceptions import (
    CdfmError,
    ConstantChannelError,
    DataLoadError,
    TrainingError,
)

logger = logging.getLogger(__name__)


class ErrorHandler:
    """Handle and format errors for user display."""

    @staticmethod
    def format_error(exception):
        """Format exception details as a one-line diagnostic."""
        if isinstance(exception, DataLoadError):
            where = []
            if exception.row is not None:
                where.append(f"row {exception.row}")
            if exception.column is not None:
                where.append(f"column '{exception.column}'")
            suffix = f" ({', '.join(where)})" if where else ""
            return f"Data error{suffix}: {exception}"
        elif isinstance(exception, ConstantChannelError):
            return f"Constant channel '{exception.channel}': {exception}"
        elif isinstance(exception, TrainingError):
            if exception.epoch is not None:
                return f"Training error at epoch {exception.epoch}: {exception}"
            return f"Training error: {exception}"
        elif isinstance(exception, CdfmError):
            return f"{type(exception).__name__}: {exception}"
        elif isinstance(exception, FileNotFoundError):
            return f"File not found: {exception}"
        elif isinstance(exception, PermissionError):
            return f"Permission error: {exception}"
        elif isinstance(exception, ValueError):
            return f"Input error: {exception}"
        else:
            return f"Error: {exception}"

    @staticmethod
    def exit_code_for(exception):
        """Map an exception to the process exit code."""
        if exception is None:
            return EXIT_OK
        if isinstance(exception, CdfmError):
            return exception.exit_code
        if isinstance(exception, FileNotFoundError):
            return EXIT_USAGE_ERROR
        return EXIT_RUNTIME_ERROR

    @staticmethod
    def log_exception(exception):
        """Log an exception with traceback."""
        logger.error(f"Exception: {type(exception).__name__}: {exception}")
        logger.debug(f"Traceback: {traceback.format_exc()}")

    @staticmethod
    def handle_exception(exception, display_callback=None):
        """Log the exception, optionally display it, and return the exit code."""
        ErrorHandler.log_exception(exception)

        error_message = ErrorHandler.format_error(exception).splitlines()[0]

        if display_callback:
            display_callback(error_message)

        return ErrorHandler.exit_code_for(exception)
