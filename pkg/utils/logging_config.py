import logging
import logging.handlers
import sys
from pathlib import Path
from config.settings import (
    LOG_DIR,
    LOG_FORMAT,
    DETAILED_LOG_FORMAT,
    LOG_LEVEL,
    LOG_FILE,
    MAX_LOG_SIZE,
    LOG_BACKUP_COUNT,
)


def setup_logging(level=None, log_file=LOG_FILE):
    """Configure logging for the application.

    Console output goes to stderr so that stdout only carries command results.
    """
    level = LOG_LEVEL if level is None else level

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    # Clear existing handlers
    root_logger.handlers = []

    detailed_formatter = logging.Formatter(DETAILED_LOG_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    console_handler.setLevel(level)
    root_logger.addHandler(console_handler)

    if log_file is not None:
        try:
            Path(LOG_DIR).mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                log_file,
                maxBytes=MAX_LOG_SIZE,
                backupCount=LOG_BACKUP_COUNT,
                encoding="utf-8",
            )
            file_handler.setFormatter(detailed_formatter)
            file_handler.setLevel(logging.DEBUG)
            root_logger.addHandler(file_handler)
        except OSError as e:
            logging.warning(f"File logging disabled: {e}")

    # Set lower level for third-party libraries
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("numexpr").setLevel(logging.WARNING)

    logging.debug(f"Logging configured at level {logging.getLevelName(level)}")
