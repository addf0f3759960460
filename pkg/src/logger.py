"""Configures and provides a centralized logging mechanism for the simulator."""

import logging
import os
from logging.handlers import RotatingFileHandler

# Define the logs directory and ensure it exists
log_directory = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'logs')
os.makedirs(log_directory, exist_ok=True)

log_file_path = os.path.join(log_directory, 'simulator.log')

LOGGER_NAME = 'IndexModSimLogger'
LEVEL_ENV = 'SIM_LOG_LEVEL'


def _level_from_env(default: int = logging.INFO) -> int:
    name = os.getenv(LEVEL_ENV, '').strip().upper()
    level = logging.getLevelName(name) if name else default
    return level if isinstance(level, int) else default


def setup_logger(name: str = LOGGER_NAME, log_file: str = log_file_path) -> logging.Logger:
    """
    Rotating file handler plus console. The level comes from SIM_LOG_LEVEL
    (default INFO). Worker processes reuse the handlers they inherit.
    """
    logger = logging.getLogger(name)
    logger.setLevel(_level_from_env())

    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    file_handler = RotatingFileHandler(log_file, maxBytes=1024*1024*5, backupCount=5)  # 5 MB
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger


def set_console_level(level: int, logger: logging.Logger = None) -> None:
    """Raises or lowers console output only; the log file keeps everything."""
    logger = logger or logging.getLogger(LOGGER_NAME)
    for handler in logger.handlers:
        if not isinstance(handler, logging.FileHandler):
            handler.setLevel(level)


logger = setup_logger()
