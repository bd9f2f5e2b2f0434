"""Material optical constants and the meander effective-medium model.

Dispersion tables come from CSV files with a ``wavelength_nm,n,k`` header.
Interpolation is linear in wavelength and never extrapolates.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

import numpy as np

from snspd_toolkit import config_loader
from snspd_toolkit.errors import MaterialRangeError, ValidationError
from snspd_toolkit.tools.optics.optics_types import DispersionTable, MeanderGeometry, Polarization
from snspd_toolkit.tools.utils import read_csv_rows

logger = logging.getLogger("snspd_toolkit")

CSV_COLUMNS = ("wavelength_nm", "n", "k")


# ---------------------------------------------------------------------------
# Dispersion tables
# ---------------------------------------------------------------------------
def load_dispersion_csv(path: Path, material_name: str | None = None) -> DispersionTable:
    """Read a dispersion CSV (header row required, ``#`` comment lines allowed)."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Dispersion file not found: {path}")
    name = material_name or path.stem
    header, rows = read_csv_rows(path)
    if tuple(h.lower() for h in header) != CSV_COLUMNS:
        raise ValidationError(f"Dispersion file {path} must have header {','.join(CSV_COLUMNS)}, got {header}")
    try:
        samples = [(float(r[0]), float(r[1]), float(r[2])) for r in rows]
    except (ValueError, IndexError) as e:
        raise ValidationError(f"Dispersion file {path}: malformed row ({e})") from e
    return DispersionTable.from_samples(name, samples, source=str(path))


def _check_range(table: DispersionTable, wavelength_nm: np.ndarray) -> None:
    lo, hi = table.range_nm
    bad = (wavelength_nm < lo) | (wavelength_nm > hi) | ~np.isfinite(wavelength_nm)
    if np.any(bad):
        raise MaterialRangeError(table.material_name, float(wavelength_nm[bad][0]), lo, hi)


def complex_index(table: DispersionTable, wavelength_nm: float) -> complex:
    """Linearly interpolated N = n − i·k at one wavelength; exact at sample points."""
    wl = np.asarray([wavelength_nm], dtype=float)
    _check_range(table, wl)
    n = float(np.interp(wl[0], table.wavelength_nm, table.n))
    k = float(np.interp(wl[0], table.wavelength_nm, table.k))
    return complex(n, -k)


def complex_index_array(table: DispersionTable, wavelength_nm: Any) -> np.ndarray:
    """Vectorised :func:`complex_index` over a wavelength grid."""
    wl = np.atleast_1d(np.asarray(wavelength_nm, dtype=float))
    _check_range(table, wl)
    n = np.interp(wl, table.wavelength_nm, table.n)
    k = np.interp(wl, table.wavelength_nm, table.k)
    return n - 1j * k


# ---------------------------------------------------------------------------
# Permittivity / index conversions
# ---------------------------------------------------------------------------
def permittivity_from_index(index: Any) -> Any:
    return np.square(index)


def index_from_permittivity(eps: Any) -> Any:
    """Square root on the branch with Im(N) ≤ 0 (absorbing media have k ≥ 0)."""
    N = np.sqrt(np.asarray(eps, dtype=complex))
    N = np.where(N.imag > 0, -N, N)
    return complex(N) if N.ndim == 0 else N


# ---------------------------------------------------------------------------
# Effective medium of the meander grating
# ---------------------------------------------------------------------------
def meander_fill_factor(geom: MeanderGeometry) -> float:
    return geom.fill_factor


def ema_permittivity(fill_factor: float, eps_wire: Any, eps_gap: Any, pol: Polarization) -> Any:
    """Zeroth-order grating EMA for a fill factor in (0, 1).

    TE (E parallel to the wires) takes the arithmetic mean of ε, TM the
    harmonic mean. Accepts scalars or arrays of permittivities.
    """
    f = float(fill_factor)
    if not (0.0 < f < 1.0):
        raise ValidationError(f"Fill factor must lie in (0, 1), got {f}")
    pol = Polarization(pol)
    ew = np.asarray(eps_wire, dtype=complex)
    eg = np.asarray(eps_gap, dtype=complex)
    if pol is Polarization.TE:
        mixed = f * ew + (1.0 - f) * eg
    else:
        # (f/εw + (1−f)/εg)⁻¹ written without dividing by either ε alone
        with np.errstate(divide="ignore", invalid="ignore"):
            mixed = ew * eg / (f * eg + (1.0 - f) * ew)
    result = np.where(ew == eg, ew, mixed)
    return complex(result) if result.ndim == 0 else result


def effective_permittivity(geom: MeanderGeometry, eps_wire: Any, eps_gap: Any, pol: Polarization) -> Any:
    """Effective permittivity of the meander layer for one polarization."""
    return ema_permittivity(geom.fill_factor, eps_wire, eps_gap, pol)


# ---------------------------------------------------------------------------
# Material catalogue
# ---------------------------------------------------------------------------
class MaterialCatalog:
    """Name → DispersionTable resolution through ``materials.yml``.

    Entries look like ``SiO2: {file: materials/sio2.csv, illustrative: true}``.
    File paths resolve against ``base_dir`` (when given), then the config
    directory, then the packaged configuration.
    """

    def __init__(self, entries: dict[str, Any] | None = None, base_dir: Path | None = None):
        self._entries: dict[str, Any] = dict(entries) if entries is not None else config_loader.load_config("materials.yml")
        self._base_dir = base_dir
        self._tables: dict[str, DispersionTable] = {}

    def names(self) -> list[str]:
        return sorted(self._entries)

    def describe(self, name: str) -> dict[str, Any]:
        entry = self._entry(name)
        return {k: v for k, v in entry.items() if k != "file"} | {"file": str(entry.get("file", ""))}

    def _entry(self, name: str) -> dict[str, Any]:
        if name not in self._entries:
            raise ValidationError(f"Unknown material '{name}'. Available: {self.names()}")
        entry = self._entries[name]
        if isinstance(entry, str):
            entry = {"file": entry}
        if not isinstance(entry, dict) or "file" not in entry:
            raise ValidationError(f"Material '{name}' needs a 'file' entry pointing at a dispersion CSV")
        return entry

    def _resolve_path(self, relative: str) -> Path:
        if self._base_dir is not None:
            local = Path(self._base_dir) / relative
            if local.is_file():
                return local
        return config_loader.resolve_data_file(relative)

    def table(self, name: str) -> DispersionTable:
        if name not in self._tables:
            entry = self._entry(name)
            path = self._resolve_path(str(entry["file"]))
            table = load_dispersion_csv(path, material_name=name)
            if entry.get("illustrative"):
                logger.debug(f"Material '{name}' uses illustrative optical constants", extra={"source": str(path)})
            self._tables[name] = table
        return self._tables[name]

    def register(self, table: DispersionTable) -> None:
        """Add an in-memory table (takes precedence over file entries of the same name)."""
        self._tables[table.material_name] = table
        self._entries.setdefault(table.material_name, {"file": table.source or "<memory>"})

    def with_entries(self, entries: dict[str, Any], base_dir: Path | None = None) -> MaterialCatalog:
        """A new catalogue with extra or overriding entries (e.g. a stack file's own materials)."""
        merged = MaterialCatalog(self._entries | dict(entries), base_dir=base_dir or self._base_dir)
        merged._tables = {k: v for k, v in self._tables.items() if k not in entries}
        return merged

    def index(self, name: str, wavelength_nm: float) -> complex:
        return complex_index(self.table(name), wavelength_nm)

    def index_array(self, name: str, wavelength_nm: Any) -> np.ndarray:
        return complex_index_array(self.table(name), wavelength_nm)

    @classmethod
    def from_tables(cls, *tables: DispersionTable) -> MaterialCatalog:
        catalog = cls(entries={})
        for table in tables:
            catalog.register(table)
        return catalog
