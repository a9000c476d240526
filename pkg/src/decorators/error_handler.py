import sys
import traceback
from functools import wraps
from typing import Any

from pydantic import ValidationError

from utils.log_utils import log

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class CfiError(Exception):
    """Base class for every error raised by the toolkit."""


class CfiValidationError(CfiError, ValueError):
    """Invalid input: parameters, grids, states or files."""


class GridError(CfiValidationError):
    """Grid sizes or Fourier duality violated."""


class NormalizationError(CfiValidationError):
    """State norm outside tolerance, or zero norm."""


class FormatError(CfiValidationError):
    """Malformed input file."""

    def __init__(self, message: str, *, offset: int | None = None, line: int | None = None):
        where = []
        if offset is not None:
            where.append(f"byte offset {offset}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} (at {', '.join(where)})" if where else message)
        self.offset = offset
        self.line = line


class ConfigError(CfiValidationError):
    """Run configuration rejected; message lists every offending line."""


class CfiRuntimeError(CfiError, RuntimeError):
    """Failure while executing a valid request."""


def catch_errors(default_return: Any | None = None):
    """
    Decorator to catch and log unexpected exceptions.

    Args:
        default_return: Value to return if an exception occurs.

    Usage:
        @catch_errors()
        def some_func(): ...

        @catch_errors(default_return=[])
        def read_optional_report(): ...
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                log(message=f"Exception: {e}\n{traceback.format_exc()}", level="ERROR")
                return default_return

        return wrapper

    return decorator


def exit_code_for(error: BaseException) -> int:
    """Exit code of a CLI command that raised `error`."""
    if isinstance(error, (CfiValidationError, ValidationError)):
        return EXIT_VALIDATION
    return EXIT_RUNTIME


def exit_on_errors():
    """
    Decorator for CLI commands: logs the failure and terminates the process with
    exit code 1 (validation error) or 2 (runtime error).
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except SystemExit:
                raise
            except Exception as e:
                code = exit_code_for(e)
                if code == EXIT_VALIDATION:
                    log(message=f"Validation error: {e}", level="ERROR")
                else:
                    log(message=f"Exception: {e}\n{traceback.format_exc()}", level="ERROR")
                sys.exit(code)

        return wrapper

    return decorator
