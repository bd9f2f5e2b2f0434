"""Domain types for material optics: dispersion tables, meander geometry, polarization.

Sign convention (used everywhere in the toolkit): time dependence exp(+iωt),
complex refractive index N = n − i·k with k ≥ 0 for absorbing media, and
relative permittivity ε = N².
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from snspd_toolkit.errors import ValidationError


class Polarization(str, Enum):
    """Linear polarization relative to the nanowires."""

    TE = "TE"  # E-field parallel to the wires
    TM = "TM"  # E-field perpendicular to the wires


@dataclass(frozen=True, eq=False)
class DispersionTable:
    """Wavelength-indexed (n, k) samples of one material.

    Arrays are stored read-only; build instances with :meth:`from_samples`.
    """

    material_name: str
    wavelength_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray
    source: str = field(default="", compare=False)

    def __post_init__(self):
        wl = np.array(self.wavelength_nm, dtype=float)
        n = np.array(self.n, dtype=float)
        k = np.array(self.k, dtype=float)
        if wl.ndim != 1 or wl.shape != n.shape or wl.shape != k.shape:
            raise ValidationError(f"Dispersion table '{self.material_name}': columns must be 1-D and equally long")
        if wl.size < 2:
            raise ValidationError(f"Dispersion table '{self.material_name}' needs at least 2 samples, got {wl.size}")
        if not np.all(np.isfinite(wl)) or not np.all(np.isfinite(n)) or not np.all(np.isfinite(k)):
            raise ValidationError(f"Dispersion table '{self.material_name}' contains non-finite values")
        if np.any(np.diff(wl) <= 0):
            raise ValidationError(f"Dispersion table '{self.material_name}': wavelengths must be strictly increasing")
        if np.any(n <= 0):
            raise ValidationError(f"Dispersion table '{self.material_name}': n must be > 0")
        if np.any(k < 0):
            raise ValidationError(f"Dispersion table '{self.material_name}': k must be >= 0")
        for name, arr in (("wavelength_nm", wl), ("n", n), ("k", k)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_samples(
        cls, material_name: str, samples: Iterable[tuple[float, float, float]], source: str = ""
    ) -> DispersionTable:
        rows = [tuple(float(v) for v in s) for s in samples]
        if any(len(r) != 3 for r in rows):
            raise ValidationError(f"Dispersion table '{material_name}': samples must be (wavelength_nm, n, k)")
        if not rows:
            raise ValidationError(f"Dispersion table '{material_name}' needs at least 2 samples, got 0")
        wl, n, k = zip(*rows)
        return cls(material_name, np.array(wl), np.array(n), np.array(k), source=source)

    @property
    def range_nm(self) -> tuple[float, float]:
        return float(self.wavelength_nm[0]), float(self.wavelength_nm[-1])

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return [(float(w), float(n), float(k)) for w, n, k in zip(self.wavelength_nm, self.n, self.k)]

    def is_lossless(self) -> bool:
        return bool(np.all(self.k == 0))


@dataclass(frozen=True)
class MeanderGeometry:
    """Nanowire meander: line width and pitch set the fill factor of the grating layer."""

    linewidth_nm: float
    pitch_nm: float
    film_thickness_nm: float
    active_radius_um: float

    def __post_init__(self):
        if not (0 < self.linewidth_nm < self.pitch_nm):
            raise ValidationError(
                f"Meander geometry needs 0 < linewidth < pitch, got linewidth={self.linewidth_nm} nm, "
                f"pitch={self.pitch_nm} nm"
            )
        if self.film_thickness_nm <= 0:
            raise ValidationError(f"Meander film thickness must be > 0 nm, got {self.film_thickness_nm}")
        if self.active_radius_um <= 0:
            raise ValidationError(f"Meander active radius must be > 0 um, got {self.active_radius_um}")

    @property
    def fill_factor(self) -> float:
        return self.linewidth_nm / self.pitch_nm

    @property
    def active_area_um2(self) -> float:
        return math.pi * self.active_radius_um**2
