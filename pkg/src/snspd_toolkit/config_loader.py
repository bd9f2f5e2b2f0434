"""Layered YAML configuration.

Each config name resolves in two layers: the copy shipped in
``snspd_toolkit/config`` and an optional file of the same name in the config
directory, whose top-level keys replace the shipped ones. Data files that
configs point at (dispersion tables, stack files) follow the same lookup.
"""

import logging
from importlib.resources import files as pkg_files
from pathlib import Path
from typing import Any

import yaml

from snspd_toolkit.errors import ValidationError

logger = logging.getLogger("snspd_toolkit")

PACKAGED = pkg_files("snspd_toolkit.config")

# Set once by the CLI from --config_dir / CONFIG_DIR
_global_config_dir: Path | None = None


def load_yaml(file_path: Path) -> dict[str, Any]:
    """Load a YAML mapping; a missing file is an empty mapping, a malformed one is an error."""
    if not file_path.exists():
        return {}
    try:
        data = yaml.safe_load(file_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ValidationError(f"Cannot parse YAML file {file_path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValidationError(f"YAML file {file_path} must contain a mapping at top level")
    return data


def _packaged_mapping(config_name: str) -> dict[str, Any]:
    resource = PACKAGED / config_name
    if not resource.is_file():
        return {}
    data = yaml.safe_load(resource.read_text(encoding="utf-8"))
    return data if isinstance(data, dict) else {}


def load_config(
    config_name: str, config_dir: Path | None = None, defaults: dict[str, Any] | None = None
) -> dict[str, Any]:
    """Merge ``defaults``, the shipped ``config_name`` and the user's copy, later layers winning per key.

    ``config_dir`` defaults to the directory set by :func:`set_global_config_dir`
    (current directory when unset).
    """
    merged = dict(defaults or {})
    merged |= _packaged_mapping(config_name)

    user_file = (config_dir or get_global_config_dir()) / config_name
    overrides = load_yaml(user_file)
    if overrides:
        merged |= overrides
        logger.info(f"{user_file} replaces keys {sorted(overrides)}")
    return merged


def resolve_data_file(relative: str, config_dir: Path | None = None) -> Path:
    """Find a data file: absolute path, then the config directory, then the packaged config tree."""
    candidate = Path(relative)
    if candidate.is_absolute():
        if candidate.is_file():
            return candidate
        raise ValidationError(f"Data file not found: {candidate}")

    base = config_dir or get_global_config_dir()
    user_path = base / candidate
    if user_path.is_file():
        return user_path

    packaged = PACKAGED.joinpath(*candidate.parts)
    if packaged.is_file():
        return Path(str(packaged))

    raise ValidationError(f"Data file '{relative}' not found in {base} or in the packaged configuration")


def set_global_config_dir(config_dir: Path) -> None:
    global _global_config_dir
    _global_config_dir = config_dir
    logger.info(f"Config directory: {config_dir}")


def get_global_config_dir() -> Path:
    return _global_config_dir or Path.cwd()
