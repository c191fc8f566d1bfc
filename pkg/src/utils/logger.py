import logging
from logging.handlers import RotatingFileHandler
import sys
from pathlib import Path
from typing import Optional
from rich.console import Console
from rich.theme import Theme

# Rich Console Setup
custom_theme = Theme({
    "info": "cyan",
    "warning": "yellow",
    "error": "bold red",
    "success": "bold green",
    "start": "bold magenta",
    "debug": "dim cyan"
})

# stdout is reserved for artifacts (networks, trees, tables)
console = Console(theme=custom_theme, stderr=True)

ROOT_LOGGER = "galled_ptn"

LOG_FORMAT = logging.Formatter(
    '[%(asctime)s] [%(levelname)s] [%(name)s]: %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)


def _add_file_handler(logger: logging.Logger, log_file: str, level: int) -> None:
    log_path = Path(log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)

    file_handler = RotatingFileHandler(
        log_path,
        maxBytes=10 * 1024 * 1024,
        backupCount=5,
        encoding='utf-8'
    )
    file_handler.setLevel(level)
    file_handler.setFormatter(LOG_FORMAT)
    logger.addHandler(file_handler)


def setup_logger(name: str = ROOT_LOGGER, log_file: Optional[str] = None, level: int = logging.INFO):
    logger = logging.getLogger(name)
    logger.setLevel(level)

    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(level)
        # a later call may still ask for a log file
        if log_file and not any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
            _add_file_handler(logger, log_file, level)
        return logger

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(LOG_FORMAT)
    logger.addHandler(console_handler)

    if log_file:
        _add_file_handler(logger, log_file, level)

    return logger


def get_logger(name: str):
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")
