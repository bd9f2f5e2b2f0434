"""Domain types for cavity sweeps, peak analysis and gap optimisation."""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from snspd_toolkit.errors import ContractError, ValidationError
from snspd_toolkit.tools.optics.optics_types import Polarization

# Laser tuning window and airgap travel of the membrane cavity
DEFAULT_WAVELENGTH_RANGE_NM = (1260.0, 1650.0)
DEFAULT_GAP_RANGE_NM = (0.0, 10_000.0)


def _strictly_increasing(name: str, values: np.ndarray) -> None:
    if values.ndim != 1 or values.size == 0:
        raise ValidationError(f"Sweep axis '{name}' must be a non-empty 1-D list")
    if np.any(np.diff(values) <= 0):
        raise ValidationError(f"Sweep axis '{name}' must be strictly increasing")


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Wavelength × airgap grid. ``polarization=None`` averages TE and TM (unpolarized light)."""

    wavelengths_nm: np.ndarray
    airgaps_nm: np.ndarray
    polarization: Polarization | None = Polarization.TE

    def __post_init__(self):
        wl = np.array(self.wavelengths_nm, dtype=float)
        gaps = np.array(self.airgaps_nm, dtype=float)
        _strictly_increasing("wavelengths_nm", wl)
        _strictly_increasing("airgaps_nm", gaps)
        if np.any(gaps < 0):
            raise ValidationError("Airgaps must be >= 0 nm")
        wl.setflags(write=False)
        gaps.setflags(write=False)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "airgaps_nm", gaps)
        if self.polarization is not None:
            object.__setattr__(self, "polarization", Polarization(self.polarization))

    @property
    def shape(self) -> tuple[int, int]:
        return self.airgaps_nm.size, self.wavelengths_nm.size

    @property
    def polarization_label(self) -> str:
        return "average" if self.polarization is None else self.polarization.value


@dataclass(frozen=True, eq=False)
class AbsorptionMap:
    """Detector absorptance, one row per airgap and one column per wavelength."""

    grid: SweepGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValidationError(f"Absorption map shape {values.shape} does not match grid {self.grid.shape}")
        if np.any(values < 0) or np.any(values > 1):
            raise ValidationError("Absorption map values must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def row_of(self, gap_nm: float) -> int:
        matches = np.flatnonzero(np.isclose(self.grid.airgaps_nm, gap_nm, rtol=0.0, atol=1e-9))
        if matches.size == 0:
            nearest = self.grid.airgaps_nm[np.argmin(np.abs(self.grid.airgaps_nm - gap_nm))]
            raise ContractError(f"Gap {gap_nm} nm is not on the sweep grid (nearest {nearest} nm)")
        return int(matches[0])

    def cutline(self, gap_nm: float) -> np.ndarray:
        """Absorption spectrum at one airgap of the grid."""
        return self.values[self.row_of(gap_nm)]

    def long_rows(self) -> np.ndarray:
        """Row-major (gap_nm, wavelength_nm, absorption) records."""
        gaps, wls = np.meshgrid(self.grid.airgaps_nm, self.grid.wavelengths_nm, indexing="ij")
        return np.column_stack([gaps.ravel(), wls.ravel(), self.values.ravel()])


@dataclass(frozen=True)
class Peak:
    wavelength_nm: float
    absorption: float
    prominence: float


@dataclass(frozen=True)
class PeakSet:
    """Peaks sorted by wavelength, each with prominence at or above ``threshold``."""

    peaks: tuple[Peak, ...]
    threshold: float

    def __len__(self) -> int:
        return len(self.peaks)

    def __iter__(self) -> Iterator[Peak]:
        return iter(self.peaks)

    @property
    def wavelengths_nm(self) -> list[float]:
        return [p.wavelength_nm for p in self.peaks]


@dataclass(frozen=True)
class GapOptimum:
    gap_nm: float
    score: float
    scan_gap_nm: float
    scan_score: float
    evaluations: int


@dataclass(frozen=True)
class BandCoverage:
    """Worst and mean absorption over a wavelength band."""

    band_nm: tuple[float, float]
    min_absorption: float
    wavelength_of_min_nm: float
    mean_absorption: float
    points: int

    def meets(self, level: float) -> bool:
        return self.min_absorption >= level
