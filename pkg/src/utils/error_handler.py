from functools import wraps
from typing import Optional
from src.utils.logger import get_logger, console

logger = get_logger("error_handler")

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INPUT_ERROR = 2


class GalledPtnError(Exception):
    """Base class for every error raised by this package."""


class InputError(GalledPtnError):
    """User input is unusable: bad ids, unknown taxa, broken files."""


class TaxaMismatchError(InputError):
    pass


class ModelError(InputError):
    """An LGT network (or tree) violates a structural invariant."""


class NewickParseError(InputError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class MatrixFormatError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


class NetworkFormatError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


class PreconditionError(GalledPtnError):
    """An operation was called outside its contract (a logic error)."""


def handle_errors(func):
    """Maps package errors raised by a CLI command to exit code 2.

    AssertionError is deliberately not caught: it signals a broken invariant.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InputError as e:
            logger.error(f"Invalid input in {func.__name__}: {e}")
            console.print(f"[error]❌ {e}[/error]")
            return EXIT_INPUT_ERROR
        except GalledPtnError as e:
            logger.error(f"Error in {func.__name__}: {str(e)}", exc_info=True)
            console.print(f"[error]❌ {e}[/error]")
            return EXIT_INPUT_ERROR
        except OSError as e:
            logger.error(f"Cannot read input in {func.__name__}: {e}")
            console.print(f"[error]❌ {e}[/error]")
            return EXIT_INPUT_ERROR

    return wrapper

