"""Domain types for time-tag simulation and analysis.

Timestamps are in ns, IRF samples in ps. Histograms carry their unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from snspd_toolkit.errors import ValidationError

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
TAG_RESOLUTION_NS = 1e-3


class PhotonStatistics(str, Enum):
    POISSON = "poisson"
    FIXED = "fixed"


@dataclass(frozen=True)
class CwSource:
    """Continuous-wave source: Poisson arrivals at a constant rate."""

    rate_per_s: float

    def __post_init__(self):
        if not self.rate_per_s >= 0:
            raise ValidationError(f"Source rate must be >= 0 photons/s, got {self.rate_per_s}")

    def describe(self) -> dict[str, Any]:
        return {"kind": "cw", "rate_per_s": self.rate_per_s}


@dataclass(frozen=True)
class PulsedSource:
    """Periodic pulses starting at t = 0; photon number per pulse is Poisson or fixed."""

    period_ns: float
    mean_photons_per_pulse: float = 1.0
    statistics: PhotonStatistics = PhotonStatistics.POISSON

    def __post_init__(self):
        object.__setattr__(self, "statistics", PhotonStatistics(self.statistics))
        if not self.period_ns > 0:
            raise ValidationError(f"Pulse period must be > 0 ns, got {self.period_ns}")
        if not self.mean_photons_per_pulse >= 0:
            raise ValidationError(f"Mean photon number must be >= 0, got {self.mean_photons_per_pulse}")
        if self.statistics is PhotonStatistics.FIXED and not float(self.mean_photons_per_pulse).is_integer():
            raise ValidationError(
                f"Fixed photon statistics need an integer photon number, got {self.mean_photons_per_pulse}"
            )

    @property
    def rate_per_s(self) -> float:
        return self.mean_photons_per_pulse / (self.period_ns * 1e-9)

    def describe(self) -> dict[str, Any]:
        return {
            "kind": "pulsed",
            "period_ns": self.period_ns,
            "mean_photons_per_pulse": self.mean_photons_per_pulse,
            "statistics": self.statistics.value,
        }


SourceModel = CwSource | PulsedSource


def source_from_mapping(data: dict[str, Any]) -> SourceModel:
    """``{"kind": "cw", "rate_per_s": ...}`` or ``{"kind": "pulsed", "period_ns": ..., ...}``."""
    spec = dict(data)
    kind = str(spec.pop("kind", "cw")).lower()
    try:
        if kind == "cw":
            return CwSource(**spec)
        if kind == "pulsed":
            return PulsedSource(**spec)
    except TypeError as e:
        raise ValidationError(f"Invalid {kind} source fields: {e}") from e
    raise ValidationError(f"Unknown source kind '{kind}'. Available: ['cw', 'pulsed']")


@dataclass(frozen=True, eq=False)
class TimeTagStream:
    """Strictly increasing detection timestamps (ns) within [0, duration]."""

    tags: np.ndarray
    duration_ns: float
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        tags = np.array(self.tags, dtype=float).reshape(-1)
        if not self.duration_ns > 0:
            raise ValidationError(f"Stream duration must be > 0 ns, got {self.duration_ns}")
        if tags.size and (tags[0] < 0 or tags[-1] > self.duration_ns):
            raise ValidationError(f"Time tags must lie within [0, {self.duration_ns}] ns")
        if np.any(np.diff(tags) <= 0):
            raise ValidationError("Time tags must be strictly increasing")
        tags.setflags(write=False)
        object.__setattr__(self, "tags", tags)

    def __len__(self) -> int:
        return int(self.tags.size)

    @property
    def count_rate_per_s(self) -> float:
        return self.tags.size / (self.duration_ns * 1e-9)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Uniform-bin histogram; ``discarded`` counts samples outside the edges."""

    bin_edges: np.ndarray
    counts: np.ndarray
    discarded: int = 0
    unit: str = "ns"

    def __post_init__(self):
        edges = np.array(self.bin_edges, dtype=float)
        counts = np.array(self.counts)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("Histogram needs at least two bin edges")
        if counts.shape != (edges.size - 1,):
            raise ValidationError(f"Histogram has {edges.size - 1} bins but {counts.size} counts")
        widths = np.diff(edges)
        if np.any(widths <= 0) or not np.allclose(widths, widths[0], rtol=1e-9, atol=0.0):
            raise ValidationError("Histogram bin edges must be increasing and uniform")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ValidationError("Histogram counts must be non-negative integers")
        if self.discarded < 0:
            raise ValidationError(f"Discarded count must be >= 0, got {self.discarded}")
        counts = counts.astype(np.int64)
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def rows(self) -> list[tuple[float, float, int]]:
        """(bin_lo, bin_hi, count) rows for CSV output."""
        edges = self.bin_edges
        return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], self.counts)]


@dataclass(frozen=True)
class GaussianFit:
    center: float
    sigma: float
    fwhm: float
    amplitude: float
    fwhm_std_error: float
    goodness: float
    iterations: int = 0
    unit: str = "ps"


@dataclass(frozen=True)
class RecoveryEstimate:
    """Dead-time figures read off a consecutive-delay histogram."""

    t_blind_ns: float
    half_recovery_ns: float
    plateau_decay_per_ns: float
    plateau_start_ns: float


@dataclass(frozen=True)
class KsResult:
    statistic: float
    critical_value: float
    samples: int
    alpha: float = 0.01

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_value
