"""
Structured JSON logging configuration for critnls

JSON records for batch runs and sweeps, a readable format for development.
Records go to stderr; stdout is left to machine-readable results.
"""

import logging
import os
import sys
from datetime import datetime, timezone

from . import __version__

try:
    from pythonjsonlogger import jsonlogger

    _JSONLOGGER_AVAILABLE = True
except ImportError:  # pragma: no cover - fallback when dependency missing
    _JSONLOGGER_AVAILABLE = False
    jsonlogger = None


if _JSONLOGGER_AVAILABLE:

    class CustomJsonFormatter(jsonlogger.JsonFormatter):
        """
        Custom JSON formatter with additional fields

        Adds run_id, service name, version and environment to all log records.
        """

        def add_fields(self, log_record, record, message_dict):
            super(CustomJsonFormatter, self).add_fields(
                log_record, record, message_dict
            )

            log_record["service"] = "critnls"
            log_record["version"] = __version__

            if hasattr(record, "run_id"):
                log_record["run_id"] = record.run_id

            log_record["environment"] = os.getenv("CRITNLS_ENV", "production")

            if not log_record.get("timestamp"):
                log_record["timestamp"] = (
                    datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")
                )

            log_record["level"] = record.levelname

else:

    class CustomJsonFormatter(logging.Formatter):
        """Fallback JSON formatter when python-json-logger is unavailable."""

        def format(self, record):
            import json

            payload = {
                "timestamp": datetime.now(timezone.utc)
                .isoformat()
                .replace("+00:00", "Z"),
                "level": record.levelname,
                "logger": record.name,
                "message": record.getMessage(),
                "service": "critnls",
                "environment": os.getenv("CRITNLS_ENV", "production"),
            }
            if hasattr(record, "run_id"):
                payload["run_id"] = record.run_id
            if record.exc_info:
                payload["exc_info"] = self.formatException(record.exc_info)
            return json.dumps(payload)


def _install(formatter: logging.Formatter, level, stream) -> logging.Logger:
    root_logger = logging.getLogger()
    root_logger.setLevel(level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(formatter)
    handler.addFilter(RunIdFilter())
    root_logger.addHandler(handler)
    return root_logger


def setup_json_logging(level=logging.INFO, stream=None):
    """
    Setup structured JSON logging

    Args:
        level: Logging level (default: INFO)
        stream: Output stream (default: stderr)
    """
    if _JSONLOGGER_AVAILABLE:
        formatter = CustomJsonFormatter(
            "%(timestamp)s %(level)s %(name)s %(message)s %(run_id)s "
            "%(service)s %(version)s %(environment)s",
            rename_fields={
                "levelname": "level",
                "name": "logger",
                "asctime": "timestamp",
            },
            datefmt="%Y-%m-%dT%H:%M:%S",
        )
    else:
        formatter = CustomJsonFormatter()

    return _install(formatter, level, stream)


def setup_development_logging(level=logging.INFO, stream=None):
    """
    Setup human-readable logging for development

    Args:
        level: Logging level (default: INFO)
        stream: Output stream (default: stderr)
    """
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - [%(run_id)s] - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    return _install(formatter, level, stream)


def configure_from_env(verbose: int = 0, log_format=None) -> logging.Logger:
    """Pick format and level from flags, falling back to CRITNLS_* variables."""
    level_name = os.getenv("CRITNLS_LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG

    fmt = log_format
    if fmt is None:
        fmt = "text" if os.getenv("CRITNLS_ENV") == "development" else "json"
    if fmt == "text":
        return setup_development_logging(level=level)
    return setup_json_logging(level=level)


def get_logger_with_run_id(name: str, run_id: str = None):
    """
    Get logger with run ID context

    Args:
        name: Logger name
        run_id: Run ID to include in logs

    Returns:
        Logger adapter with run ID
    """
    logger = logging.getLogger(name)

    if run_id:
        return logging.LoggerAdapter(logger, {"run_id": run_id})

    return logger


class RunIdFilter(logging.Filter):
    """
    Logging filter to add a run ID to log records
    """

    def __init__(self, run_id="N/A"):
        super().__init__()
        self.run_id = run_id

    def filter(self, record):
        if not hasattr(record, "run_id"):
            record.run_id = self.run_id
        return True


class RunLoggingContext:
    """
    Context manager tagging every record emitted during a run

    Usage:
        with RunLoggingContext("eps=+0.1"):
            logger.info("Evolving")  # Includes run_id
    """

    def __init__(self, run_id: str):
        self.run_id = run_id
        self.filter = RunIdFilter(run_id)
        self.handlers = []

    def __enter__(self):
        self.handlers = list(logging.getLogger().handlers)
        for handler in self.handlers:
            handler.filters.insert(0, self.filter)
        return self

    def __exit__(self, exc_type, exc_val, _exc_tb):
        for handler in self.handlers:
            if self.filter in handler.filters:
                handler.removeFilter(self.filter)
