"""Shared fixtures for the snspd_toolkit test suite."""

from __future__ import annotations

from collections.abc import Callable

import pytest

from snspd_toolkit import config_loader
from snspd_toolkit.tools.optics.materials import MaterialCatalog
from snspd_toolkit.tools.optics.optics_types import DispersionTable


def constant_table(name: str, n: float, k: float = 0.0, lo: float = 300.0, hi: float = 3000.0) -> DispersionTable:
    return DispersionTable.from_samples(name, [(lo, n, k), (hi, n, k)])


@pytest.fixture(autouse=True)
def isolated_config_dir(tmp_path_factory, monkeypatch):
    """Point user config lookups at an empty directory so local *.yml files never leak in."""
    config_dir = tmp_path_factory.mktemp("config")
    monkeypatch.setattr(config_loader, "_global_config_dir", config_dir)
    monkeypatch.setenv("NO_FILE_LOGS", "1")
    for var in ("PROFILE", "CONFIG_DIR", "OUTPUT_DIR", "OUTPUT_FORMAT", "SEED", "LOGGING_LEVEL"):
        monkeypatch.delenv(var, raising=False)
    return config_dir


@pytest.fixture
def make_catalog() -> Callable[..., MaterialCatalog]:
    """Build an in-memory catalogue from ``name=(n, k)`` keyword pairs."""

    def _make(**materials: tuple[float, float]) -> MaterialCatalog:
        tables = [constant_table(name, n, k) for name, (n, k) in materials.items()]
        return MaterialCatalog.from_tables(*tables)

    return _make


@pytest.fixture
def toy_catalog(make_catalog) -> MaterialCatalog:
    return make_catalog(air=(1.0, 0.0), glass=(1.5, 0.0), silica=(1.45, 0.0), metal=(0.5, 10.0), wire=(4.5, 5.4))


@pytest.fixture
def packaged_catalog() -> MaterialCatalog:
    return MaterialCatalog()
