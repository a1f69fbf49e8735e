"""
Structured logging for diploid-vortex.

Solvers and simulators log through ``get_logger``; ``setup_logging`` wires the
package logger to stderr by default so CSV written to stdout stays clean.
"""

import functools
import json
import logging
import logging.handlers
import os
import sys
import time
import uuid
from contextvars import ContextVar
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Optional, TypeVar

import structlog

from diploid_vortex import __version__

F = TypeVar("F", bound=Callable[..., Any])

PACKAGE_LOGGER = "diploid_vortex"

run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)
command_var: ContextVar[Optional[str]] = ContextVar("command", default=None)


class VortexJsonFormatter(logging.Formatter):
    """One JSON object per record, with run context and extra fields."""

    def format(self, record: logging.LogRecord) -> str:
        """Format a record as a single JSON line."""
        log_entry: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "process_id": os.getpid(),
        }

        run_id = run_id_var.get()
        if run_id:
            log_entry["run_id"] = run_id
        command = command_var.get()
        if command:
            log_entry["command"] = command

        extra = getattr(record, "extra", None)
        if extra:
            log_entry["extra"] = extra

        if record.exc_info and record.exc_info[0] is not None:
            log_entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": self.formatException(record.exc_info),
            }

        return json.dumps(log_entry, default=str)


class VortexTextFormatter(logging.Formatter):
    """Human-readable formatter, colored when attached to a terminal."""

    COLORS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[35m",
        "RESET": "\033[0m",
    }

    def __init__(self, use_colors: bool = True):
        super().__init__()
        self.use_colors = use_colors and hasattr(sys.stderr, "isatty") and sys.stderr.isatty()

    def format(self, record: logging.LogRecord) -> str:
        """Format a record as one bracketed line, extras appended as key=value."""
        color = reset = ""
        if self.use_colors:
            color = self.COLORS.get(record.levelname, "")
            reset = self.COLORS["RESET"]

        timestamp = datetime.fromtimestamp(record.created).strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]
        parts = [
            f"{color}[{timestamp}]",
            f"[{record.levelname:8}]",
            f"[{record.name}]",
            f"{record.getMessage()}{reset}",
        ]

        run_id = run_id_var.get()
        if run_id:
            parts.insert(-1, f"[run:{run_id[:8]}]")

        extra = getattr(record, "extra", None)
        if extra:
            parts.append("(" + " ".join(f"{k}={v}" for k, v in extra.items()) + ")")

        message = " ".join(parts)
        if record.exc_info:
            message += "\n" + self.formatException(record.exc_info)
        return message


class StandardStreamHandler(logging.StreamHandler):
    """
    Stream handler bound to ``sys.stdout`` or ``sys.stderr`` by name.

    The stream is looked up on every emit, so a replaced ``sys.stderr``
    (pytest capture, ``contextlib.redirect_stderr``) receives the records.
    """

    def __init__(self, name: str = "stderr"):
        super().__init__(getattr(sys, name))
        self.stream_name = name

    @property  # type: ignore[override]
    def stream(self) -> Any:
        return getattr(sys, self.stream_name)

    @stream.setter
    def stream(self, value: Any) -> None:
        pass


class VortexLoggerAdapter(logging.LoggerAdapter):
    """Adapter that folds bound context and per-call ``extra`` into ``record.extra``."""

    def process(self, msg: Any, kwargs: Dict[str, Any]) -> tuple[Any, Dict[str, Any]]:
        """Merge bound and per-call extras, stamping service and version."""
        extra: Dict[str, Any] = dict(self.extra or {})
        extra.update(kwargs.get("extra") or {})
        extra.setdefault("service", "diploid-vortex")
        extra.setdefault("version", __version__)
        kwargs["extra"] = {"extra": extra}
        return msg, kwargs


def setup_logging(
    level: str = "WARNING",
    format_type: str = "text",
    output: str = "stderr",
    file_path: Optional[str] = None,
    max_file_size: int = 10485760,
    backup_count: int = 5,
) -> None:
    """
    Setup structured logging for diploid-vortex.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_type: Format type ("json" or "text")
        output: Output destination ("stderr", "stdout", or "file")
        file_path: File path for file output
        max_file_size: Maximum log file size in bytes
        backup_count: Number of backup files to keep
    """
    numeric_level = getattr(logging, str(level).upper())

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer()
            if format_type == "text"
            else structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )

    root_logger = logging.getLogger(PACKAGE_LOGGER)
    root_logger.setLevel(numeric_level)
    root_logger.propagate = False
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    formatter: logging.Formatter
    if format_type == "json":
        formatter = VortexJsonFormatter()
    else:
        formatter = VortexTextFormatter()

    handler: logging.Handler
    if output == "stderr":
        handler = StandardStreamHandler("stderr")
    elif output == "stdout":
        handler = StandardStreamHandler("stdout")
    elif output == "file":
        path = file_path or "diploid_vortex.log"
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            path, maxBytes=max_file_size, backupCount=backup_count
        )
    else:
        raise ValueError(f"Unknown output type: {output}")

    handler.setFormatter(formatter)
    root_logger.addHandler(handler)


def get_logger(name: str, **extra: Any) -> VortexLoggerAdapter:
    """
    Get a logger with contextual information.

    Args:
        name: Logger name (usually __name__)
        **extra: Additional context to include in all log messages

    Returns:
        Adapter whose records carry ``extra`` under ``record.extra``
    """
    return VortexLoggerAdapter(logging.getLogger(name), extra)


def get_event_logger(**initial: Any) -> Any:
    """structlog bound logger for key=value event streams (verification runs)."""
    return structlog.get_logger(PACKAGE_LOGGER).bind(**initial)


class RunContext:
    """
    Context manager tagging every record with a run identifier.

    Example:
        >>> with RunContext(command="tau"):
        ...     logger.info("solving")  # carries run_id and command
    """

    def __init__(self, command: Optional[str] = None, run_id: Optional[str] = None):
        self.command = command
        self.run_id = run_id or uuid.uuid4().hex
        self._tokens: list[Any] = []

    def __enter__(self) -> "RunContext":
        """Bind run_id and command for stdlib and structlog records."""
        self._tokens = [run_id_var.set(self.run_id), command_var.set(self.command)]
        structlog.contextvars.bind_contextvars(run_id=self.run_id, command=self.command)
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Restore the previous context."""
        run_token, command_token = self._tokens
        run_id_var.reset(run_token)
        command_var.reset(command_token)
        structlog.contextvars.unbind_contextvars("run_id", "command")


def timed_operation(operation_name: str) -> Callable[[F], F]:
    """
    Decorator to log operation timing.

    Example:
        >>> @timed_operation("lattice_solve")
        ... def solve(): ...
    """

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            logger = get_logger(func.__module__)
            start_time = time.perf_counter()
            logger.debug(f"Starting {operation_name}", extra={"operation": operation_name})
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    f"Failed {operation_name}",
                    extra={
                        "operation": operation_name,
                        "duration_ms": round((time.perf_counter() - start_time) * 1000, 2),
                        "success": False,
                        "error": str(e),
                    },
                )
                raise
            logger.info(
                f"Completed {operation_name}",
                extra={
                    "operation": operation_name,
                    "duration_ms": round((time.perf_counter() - start_time) * 1000, 2),
                    "success": True,
                },
            )
            return result

        return wrapper  # type: ignore[return-value]

    return decorator
