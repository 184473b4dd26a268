"""
Logging setup: structlog over the standard logging module
"""

import logging
import sys
from typing import Optional

import structlog

_configured = False


def configure_logging(level: str = "WARNING", log_file: Optional[str] = None) -> None:
    """Route structlog events to stderr (and optionally a file)"""
    global _configured

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(message)s",
        handlers=handlers,
        force=True,
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            structlog.processors.KeyValueRenderer(
                key_order=["timestamp", "level", "logger", "event"]
            ),
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True


def _ensure_configured() -> None:
    if _configured:
        return
    from config import get_settings
    from errors import ConfigError

    try:
        settings = get_settings()
    except ConfigError:
        # reported again by whoever reads the settings for real
        configure_logging()
        return
    configure_logging(settings.log_level, settings.log_file)


def get_logger(name: str):
    _ensure_configured()
    return structlog.get_logger(name)
