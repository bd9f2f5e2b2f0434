"""Runtime settings and the packaged configuration tree.

The YAML files next to this module (materials, stack and recovery presets,
metrology defaults, run profiles) and the dispersion tables under
``materials/`` are package data, read through ``snspd_toolkit.config_loader``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

_TRUTHY = {"1", "true", "yes"}


@dataclass(frozen=True)
class Settings:
    profile: str | None = None
    config_dir: str | None = None  # overrides for presets and materials

    output_dir: str = "out"
    output_format: str = "csv"  # csv | json-text
    seed: int | None = None

    logging_level: str = "WARNING"
    file_logs: bool = True  # run.log.jsonl next to the outputs

    # 1 = serial
    sweep_workers: int = 1
    trial_workers: int = 1


def _env_int(name: str, default: int | None) -> int | None:
    raw = os.getenv(name)
    return int(raw) if raw else default


def settings_from_env() -> Settings:
    """Settings from PROFILE, CONFIG_DIR, OUTPUT_DIR, OUTPUT_FORMAT, SEED, LOGGING_LEVEL,
    NO_FILE_LOGS, SWEEP_WORKERS and TRIAL_WORKERS; all optional.
    """
    return Settings(
        profile=os.getenv("PROFILE") or None,
        config_dir=os.getenv("CONFIG_DIR") or None,
        output_dir=os.getenv("OUTPUT_DIR") or "out",
        output_format=(os.getenv("OUTPUT_FORMAT") or "csv").lower(),
        seed=_env_int("SEED", None),
        logging_level=os.getenv("LOGGING_LEVEL") or "WARNING",
        file_logs=os.getenv("NO_FILE_LOGS", "").lower() not in _TRUTHY,
        sweep_workers=_env_int("SWEEP_WORKERS", 1) or 1,
        trial_workers=_env_int("TRIAL_WORKERS", 1) or 1,
    )
