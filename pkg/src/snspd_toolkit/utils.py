"""Utilities for the SNSPD toolkit.

- Logging setup (structured JSON sidecar + console on stderr)
- Profile loading: packaged profiles.yml + config directory profiles.yml (config dir wins)
"""

import json
import logging
import logging.config
import os
from pathlib import Path
from typing import Any

from snspd_toolkit import config_loader
from snspd_toolkit.errors import ValidationError

logger = logging.getLogger("snspd_toolkit")

LOG_FILE_NAME = "run.log.jsonl"
LOG_DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"
_TRUTHY = {"1", "true", "yes"}


# Attributes every LogRecord carries; anything else arrived through ``extra``.
_RECORD_ATTRS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime", "taskName"}


class CustomJSONFormatter(logging.Formatter):
    """One JSON object per record; ``extra`` payloads are merged in, dict payloads flattened."""

    def format(self, record):
        entry: dict[str, Any] = {
            "timestamp": self.formatTime(record, self.datefmt),
            "name": record.name,
            "level": record.levelname,
            "module": record.module,
            "line": record.lineno,
            "message": record.getMessage(),
        }
        for key, value in vars(record).items():
            if key in _RECORD_ATTRS:
                continue
            if isinstance(value, dict):
                entry.update(value)
            else:
                entry[key] = value
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, ensure_ascii=False, default=str)


def _log_file_dir(log_dir: str | Path | None) -> Path | None:
    """Directory for run.log.jsonl, or None when file logging is off or impossible."""
    if not log_dir or os.getenv("NO_FILE_LOGS", "").lower() in _TRUTHY:
        return None
    path = Path(log_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return path


def setup_logging(level: str = "WARNING", log_dir: str | Path | None = None) -> logging.Logger:
    """Configure the ``snspd_toolkit`` logger.

    The console handler writes human-readable lines to stderr at ``level``
    (stdout carries command reports). When ``log_dir`` is given, every record
    down to DEBUG is also appended to ``log_dir/run.log.jsonl``; ``NO_FILE_LOGS=1``
    turns that off.
    """
    level = level.upper()
    handlers: dict[str, Any] = {
        "console": {
            "class": "logging.StreamHandler",
            "level": level,
            "formatter": "console",
            "stream": "ext://sys.stderr",
        }
    }
    file_dir = _log_file_dir(log_dir)
    if file_dir is not None:
        handlers["run_log"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "DEBUG",
            "formatter": "json",
            "filename": str(file_dir / LOG_FILE_NAME),
            "maxBytes": 1_000_000,
            "backupCount": 3,
            "encoding": "utf-8",
        }

    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "console": {"format": "%(levelname)-7s %(name)s: %(message)s"},
                "json": {"()": CustomJSONFormatter, "datefmt": LOG_DATE_FORMAT},
            },
            "handlers": handlers,
            "loggers": {"snspd_toolkit": {"level": "DEBUG", "handlers": list(handlers), "propagate": False}},
            "root": {"level": level, "handlers": ["console"]},
        }
    )
    return logging.getLogger("snspd_toolkit")


# -------------------- Profiles -------------------- #
def load_profiles() -> dict[str, Any]:
    """Run profiles: packaged profiles.yml with the config directory's profiles.yml on top."""
    profiles = config_loader.load_config("profiles.yml")
    logger.debug("Profiles available", extra={"profiles": sorted(profiles)})
    return profiles


def _profile(profile_name: str) -> dict[str, Any]:
    profiles = load_profiles()
    if profile_name not in profiles:
        raise ValidationError(f"Profile '{profile_name}' not found. Available: {sorted(profiles)}")
    return profiles[profile_name] or {}


def get_profile_run_config(profile_name: str | None, command: str) -> dict[str, Any]:
    """A profile's default parameters for one command, with $VARS expanded in string values.

    A profile has an optional ``run:`` section (settings such as seed or
    output_format) and one mapping per command name with parameter defaults.
    """
    if not profile_name:
        return {}
    params = _profile(profile_name).get(command) or {}
    return {k: os.path.expandvars(v) if isinstance(v, str) else v for k, v in params.items()}


def get_profile_settings(profile_name: str | None) -> dict[str, Any]:
    """The ``run:`` section of a profile (seed, output_format, workers...)."""
    if not profile_name:
        return {}
    return dict(_profile(profile_name).get("run") or {})
