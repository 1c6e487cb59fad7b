from unittest.mock import Mock

from config.settings import EXIT_OK, EXIT_RUNTIME_ERROR, EXIT_USAGE_ERROR
from exceptions.forecast_exceptions import (
    ConfigError,
    ConstantChannelError,
    DataLoadError,
    ShapeMismatchError,
    TrainingError,
    UsageError,
)
from utils.error_handler import ErrorHandler


def test_format_error_data_load_error_names_row_and_column():
    exception = DataLoadError("non-numeric cell 'x'", row=3, column="HUFL")
    result = ErrorHandler.format_error(exception)
    assert result == "Data error (row 3, column 'HUFL'): non-numeric cell 'x'"


def test_format_error_constant_channel():
    exception = ConstantChannelError("no spread", channel="OT")
    assert ErrorHandler.format_error(exception) == "Constant channel 'OT': no spread"


def test_format_error_training_error_with_epoch():
    exception = TrainingError("validation loss diverged", epoch=4)
    assert ErrorHandler.format_error(exception) == "Training error at epoch 4: validation loss diverged"


def test_format_error_other_toolkit_error():
    exception = ShapeMismatchError("H=96 vs H=192")
    assert ErrorHandler.format_error(exception) == "ShapeMismatchError: H=96 vs H=192"


def test_format_error_value_error():
    exception = ValueError("Invalid input")
    assert ErrorHandler.format_error(exception) == "Input error: Invalid input"


def test_format_error_file_not_found_error():
    exception = FileNotFoundError("File missing")
    assert ErrorHandler.format_error(exception) == "File not found: File missing"


def test_format_error_permission_error():
    exception = PermissionError("Access denied")
    assert ErrorHandler.format_error(exception) == "Permission error: Access denied"


def test_format_error_generic_error():
    exception = Exception("Generic error")
    assert ErrorHandler.format_error(exception) == "Error: Generic error"


def test_exit_codes():
    assert ErrorHandler.exit_code_for(None) == EXIT_OK
    assert ErrorHandler.exit_code_for(ConfigError("bad")) == EXIT_USAGE_ERROR
    assert ErrorHandler.exit_code_for(UsageError("bad")) == EXIT_USAGE_ERROR
    assert ErrorHandler.exit_code_for(FileNotFoundError("x.csv")) == EXIT_USAGE_ERROR
    assert ErrorHandler.exit_code_for(TrainingError("nan")) == EXIT_RUNTIME_ERROR
    assert ErrorHandler.exit_code_for(RuntimeError("boom")) == EXIT_RUNTIME_ERROR


def test_log_exception(caplog):
    exception = ValueError("Test exception")
    with caplog.at_level("DEBUG"):
        ErrorHandler.log_exception(exception)
    assert "Exception: ValueError: Test exception" in caplog.text
    assert "Traceback:" in caplog.text


def test_handle_exception_with_display_callback():
    exception = ValueError("Test exception")
    mock_display_callback = Mock()
    result = ErrorHandler.handle_exception(exception, display_callback=mock_display_callback)
    mock_display_callback.assert_called_once_with("Input error: Test exception")
    assert result == EXIT_RUNTIME_ERROR


def test_handle_exception_multiline_message_is_cut_to_one_line():
    mock_display_callback = Mock()
    ErrorHandler.handle_exception(ValueError("first\nsecond"), display_callback=mock_display_callback)
    mock_display_callback.assert_called_once_with("Input error: first")
