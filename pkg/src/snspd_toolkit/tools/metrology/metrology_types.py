"""Domain types for the efficiency-measurement arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field

from snspd_toolkit.errors import ValidationError

# Exact SI values
PLANCK_J_S = 6.62607015e-34
SPEED_OF_LIGHT_M_S = 299_792_458.0

DEFAULT_LASER_WINDOW_NM = (1260.0, 1650.0)
DEFAULT_RATIO_BAND_DB = (50.0, 60.0)


def photon_energy_j(wavelength_nm: float) -> float:
    """E = hc/λ."""
    return PLANCK_J_S * SPEED_OF_LIGHT_M_S / (wavelength_nm * 1e-9)


@dataclass(frozen=True)
class AttenuationChain:
    """Monitor-to-detector attenuation.

    ``splitter_ratio_db`` is the calibrated P1/P2 ratio and alone sets the power at
    the detector. ``nd_stages_db`` sit on the laser side of the splitter: they
    scale both arms, so the monitor reading already includes them and they are
    kept as a record of the source setting only. ``ratio_band_db`` bounds the
    calibrated ratio; ``None`` disables the check.
    """

    splitter_ratio_db: float
    nd_stages_db: tuple[float, ...] = ()
    calibration_readings: tuple[tuple[float, float], ...] = ()
    ratio_band_db: tuple[float, float] | None = DEFAULT_RATIO_BAND_DB

    def __post_init__(self):
        object.__setattr__(self, "nd_stages_db", tuple(float(s) for s in self.nd_stages_db))
        object.__setattr__(
            self, "calibration_readings", tuple((float(p1), float(p2)) for p1, p2 in self.calibration_readings)
        )
        for p1, p2 in self.calibration_readings:
            if p1 <= 0 or p2 <= 0:
                raise ValidationError(f"Calibration powers must be > 0 W, got ({p1}, {p2})")
        if self.ratio_band_db is not None:
            lo, hi = self.ratio_band_db
            if not lo <= self.splitter_ratio_db <= hi:
                raise ValidationError(
                    f"Attenuation ratio {self.splitter_ratio_db:.4g} dB lies outside the calibrated band [{lo:g}, {hi:g}] dB"
                )

    @property
    def source_nd_db(self) -> float:
        return sum(self.nd_stages_db)

    @property
    def linear_factor(self) -> float:
        """Fraction of the monitor power reaching the detector."""
        return 10.0 ** (-self.splitter_ratio_db / 10.0)


@dataclass(frozen=True)
class PhotonFlux:
    power_at_detector_w: float
    wavelength_nm: float
    flux_per_s: float

    @classmethod
    def from_power(cls, power_w: float, wavelength_nm: float) -> PhotonFlux:
        if power_w < 0:
            raise ValidationError(f"Optical power must be >= 0 W, got {power_w}")
        if wavelength_nm <= 0:
            raise ValidationError(f"Wavelength must be > 0 nm, got {wavelength_nm}")
        return cls(power_w, wavelength_nm, power_w / photon_energy_j(wavelength_nm))

    @classmethod
    def from_rate(cls, rate_per_s: float, wavelength_nm: float) -> PhotonFlux:
        """Flux object for a known photon rate (e.g. a simulated source)."""
        if rate_per_s < 0:
            raise ValidationError(f"Photon rate must be >= 0 /s, got {rate_per_s}")
        if wavelength_nm <= 0:
            raise ValidationError(f"Wavelength must be > 0 nm, got {wavelength_nm}")
        return cls(rate_per_s * photon_energy_j(wavelength_nm), wavelength_nm, float(rate_per_s))


@dataclass(frozen=True)
class SdeResult:
    counts_registered: float
    dark_counts: float
    flux: PhotonFlux
    r_rfl: float
    sde: float
    uncertainty: float = 0.0  # relative, RSS budget total

    @property
    def over_unity(self) -> bool:
        return self.sde > 1.0

    @property
    def absolute_uncertainty(self) -> float:
        return self.sde * self.uncertainty


@dataclass(frozen=True)
class UncertaintyBudget:
    components: tuple[tuple[str, float], ...]
    total: float


@dataclass(frozen=True)
class PowerMeter:
    """Power meter with its accuracy and linearity (percent) and the factor normalising it to the reference meter."""

    name: str
    accuracy_pct: float
    linearity_pct: float
    normalization: float = 1.0

    def __post_init__(self):
        if self.accuracy_pct < 0 or self.linearity_pct < 0:
            raise ValidationError(f"Power meter '{self.name}': accuracy and linearity must be >= 0")
        if self.normalization <= 0:
            raise ValidationError(f"Power meter '{self.name}': normalization factor must be > 0")

    def uncertainty_components(self) -> list[tuple[str, float]]:
        return [
            (f"{self.name} accuracy", self.accuracy_pct / 100.0),
            (f"{self.name} linearity", self.linearity_pct / 100.0),
        ]


@dataclass(frozen=True)
class SessionRecord:
    """One line of a measurement session. Calibration records carry P2; measurement records carry counts."""

    timestamp: str
    p1_w: float
    p2_w: float | None = None
    wavelength_nm: float | None = None
    counts_per_s: float | None = None
    dark_per_s: float = 0.0

    @property
    def is_calibration(self) -> bool:
        return self.p2_w is not None

    @property
    def is_measurement(self) -> bool:
        return self.counts_per_s is not None


@dataclass(frozen=True)
class SessionResult:
    ratio_db: float
    ratio_spread: float
    ratio_stable: bool
    budget: UncertaintyBudget
    results: tuple[SdeResult, ...] = field(default_factory=tuple)
    timestamps: tuple[str, ...] = field(default_factory=tuple)
