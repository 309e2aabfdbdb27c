"""
Logging configuration: structlog on top of stdlib handlers
"""

import logging
import sys
from pathlib import Path
from typing import Any, MutableMapping, Optional

import structlog
from pythonjsonlogger import jsonlogger

from moran_wave.config import Settings, settings

LOG_FILE_NAME = "moran_wave.log"

# LogRecord refuses `extra` keys that shadow its own attributes
_RESERVED_KEYS = frozenset(logging.makeLogRecord({}).__dict__) | {"message", "asctime"}


def _keep_clear_of_record_attributes(
    logger: Any, method_name: str, event_dict: MutableMapping[str, Any]
) -> MutableMapping[str, Any]:
    for key in [k for k in event_dict if k in _RESERVED_KEYS]:
        event_dict[f"{key}_"] = event_dict.pop(key)
    return event_dict


def configure_logging(cfg: Optional[Settings] = None) -> Optional[Path]:
    """
    Configure structlog to write to stderr and, optionally, a log file

    stdout is left alone so `simulate` can stream CSV through it.
    Returns the log file path when file logging is on.
    """
    cfg = cfg or settings
    log_level = logging.DEBUG if cfg.DEBUG else logging.INFO

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(log_level)

    if cfg.DEBUG:
        formatter: logging.Formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        )
    else:
        formatter = jsonlogger.JsonFormatter(
            "%(asctime)s %(name)s %(levelname)s %(message)s"
        )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    log_path: Optional[Path] = None
    if cfg.LOG_TO_FILE:
        try:
            cfg.LOG_DIR.mkdir(parents=True, exist_ok=True)
            log_path = cfg.LOG_DIR / LOG_FILE_NAME
            file_handler = logging.FileHandler(log_path)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
        except OSError:
            log_path = None

    logging.getLogger("numba").setLevel(logging.WARNING)
    logging.captureWarnings(True)

    if cfg.DEBUG:
        final_processor = structlog.dev.ConsoleRenderer(colors=True)
    else:
        # JsonFormatter renders the event dict as fields of one JSON line
        final_processor = structlog.stdlib.render_to_log_kwargs

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            _keep_clear_of_record_attributes,
            final_processor,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
    return log_path
