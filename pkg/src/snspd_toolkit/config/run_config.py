"""Per-command parameter models.

Each command validates its resolved parameters (profile defaults, then the
``--config`` file, then flags) against one of these models before any
computation runs. ``handler_kwargs()`` turns a validated model into the
keyword arguments of the command's handler.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, ClassVar, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Polarization = Literal["TE", "TM"]
SweepPolarization = Literal["TE", "TM", "average"]


def _existing_path(value: str | None, what: str) -> str | None:
    if value is not None and not Path(value).exists():
        raise ValueError(f"{what} not found: {value}")
    return value


class RunConfig(BaseModel):
    """Common behaviour of all command parameter sets."""

    model_config = ConfigDict(extra="forbid")

    # name of the seed field, or None for deterministic commands
    seed_path: ClassVar[tuple[str, ...] | None] = None
    # Settings attribute providing the default worker count
    workers_setting: ClassVar[str | None] = None

    @classmethod
    def apply_seed(cls, params: dict[str, Any], seed: int | None) -> dict[str, Any]:
        """Place a ``--seed`` flag value where this command expects its seed."""
        if seed is None or cls.seed_path is None:
            return params
        params = dict(params)
        *parents, leaf = cls.seed_path
        target = params
        for key in parents:
            if not isinstance(target.get(key), dict):
                return params
            target[key] = dict(target[key])
            target = target[key]
        target[leaf] = seed
        return params

    def handler_kwargs(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class _StackParams(RunConfig):
    stack: str | dict[str, Any] | None = Field(
        None, description="Stack preset name, stack YAML path or inline stack mapping (default membrane-cavity-v1)."
    )
    overrides: dict[str, Any] | None = Field(None, description="Builder parameter overrides for a preset stack.")

    @field_validator("stack")
    @classmethod
    def _stack_file_exists(cls, v):
        if isinstance(v, str) and v.lower().endswith((".yml", ".yaml")):
            _existing_path(v, "Stack file")
        return v


class IndexConfig(RunConfig):
    material: str = Field(..., description="Material name from materials.yml.")
    wavelength_nm: float = Field(1350.0, gt=0)


class EmaConfig(RunConfig):
    geometry: dict[str, float] = Field(
        ..., description="Meander geometry: linewidth_nm, pitch_nm, film_thickness_nm, active_radius_um."
    )
    wire_material: str = "NbTiN-illustrative"
    gap_material: str = "air"
    wavelength_nm: float = Field(1350.0, gt=0)


class QuarterWaveConfig(RunConfig):
    material: str = "SiO2"
    wavelength_nm: float = Field(1350.0, gt=0)


class SolveConfig(_StackParams):
    wavelength_nm: float = Field(1350.0, gt=0)
    polarization: Polarization = "TE"
    gap_nm: float | None = Field(None, ge=0)


class SpectrumConfig(_StackParams):
    wavelength_start_nm: float = Field(1260.0, gt=0)
    wavelength_stop_nm: float = Field(1650.0, gt=0)
    wavelength_step_nm: float = Field(1.0, gt=0)
    polarization: Polarization = "TE"
    gap_nm: float | None = Field(None, ge=0)


class SweepConfig(_StackParams):
    workers_setting: ClassVar[str | None] = "sweep_workers"

    wavelength_start_nm: float = Field(1260.0, gt=0)
    wavelength_stop_nm: float = Field(1650.0, gt=0)
    wavelength_step_nm: float = Field(1.0, gt=0)
    gap_start_nm: float = Field(0.0, ge=0)
    gap_stop_nm: float = Field(10_000.0, ge=0)
    gap_step_nm: float = Field(50.0, gt=0)
    polarization: SweepPolarization = "TE"
    prominence: float = Field(0.02, gt=0)
    cutline_gaps_nm: list[float] | None = None
    band_nm: tuple[float, float] | None = None
    spacers_nm: list[float] | None = None
    workers: int = Field(1, ge=1)

    def handler_kwargs(self) -> dict[str, Any]:
        kwargs = super().handler_kwargs()
        if self.polarization == "average":
            kwargs["polarization"] = None
        return kwargs


class OptimizeConfig(_StackParams):
    targets: list[tuple[float, float]] = Field(..., min_length=1, description="(wavelength_nm, weight) pairs.")
    gap_min_nm: float = Field(0.0, ge=0)
    gap_max_nm: float = Field(10_000.0, ge=0)
    resolution_nm: float = Field(5.0, gt=0)
    tolerance_nm: float = Field(0.1, gt=0)
    polarization: SweepPolarization = "TE"

    @field_validator("targets", mode="before")
    @classmethod
    def _bare_wavelengths(cls, v):
        # a plain wavelength list means equal weights
        if isinstance(v, list):
            return [(t, 1.0) if isinstance(t, int | float) else t for t in v]
        return v

    def handler_kwargs(self) -> dict[str, Any]:
        kwargs = super().handler_kwargs()
        if self.polarization == "average":
            kwargs["polarization"] = None
        return kwargs


class ContrastConfig(_StackParams):
    wavelength_nm: float = Field(1350.0, gt=0)
    gap_nm: float = Field(..., ge=0)


class FluxConfig(RunConfig):
    power_w: float = Field(..., gt=0, description="Monitor power in W.")
    wavelength_nm: float = Field(1350.0, gt=0)
    attenuation_db: float | None = Field(None, ge=0)
    calibration_readings: list[tuple[float, float]] | None = Field(
        None, description="(P1, P2) power pairs in W calibrating the splitter ratio."
    )
    nd_stages_db: list[float] | None = None
    check_band: bool = True

    @model_validator(mode="after")
    def _one_attenuation_source(self):
        if (self.attenuation_db is None) == (self.calibration_readings is None):
            raise ValueError("Give exactly one of attenuation_db or calibration_readings")
        return self


class CalibrateConfig(RunConfig):
    readings: list[tuple[float, float]] = Field(..., min_length=1, description="(P1, P2) power pairs in W.")


class EndFaceConfig(RunConfig):
    n_core: float = Field(1.45, gt=0)
    n_outside: float = Field(1.0, gt=0)


class SdeConfig(RunConfig):
    counts_per_s: float = Field(..., ge=0)
    wavelength_nm: float = Field(1350.0, gt=0)
    dark_per_s: float = Field(0.0, ge=0)
    flux_per_s: float | None = Field(None, gt=0)
    power_w: float | None = Field(None, gt=0)
    attenuation_db: float | None = Field(None, ge=0)
    nd_stages_db: list[float] | None = None
    r_rfl: float | None = Field(None, ge=0, lt=1)
    n_core: float = Field(1.45, gt=0)
    n_outside: float = Field(1.0, gt=0)
    components_percent: dict[str, float] | None = None
    check_band: bool = True

    @model_validator(mode="after")
    def _flux_or_power(self):
        if self.flux_per_s is None and (self.power_w is None or self.attenuation_db is None):
            raise ValueError("Give flux_per_s, or power_w together with attenuation_db")
        return self

    def handler_kwargs(self) -> dict[str, Any]:
        kwargs = super().handler_kwargs()
        percent = kwargs.pop("components_percent", None)
        if percent is not None:
            kwargs["components"] = {k: v / 100.0 for k, v in percent.items()}
        return kwargs


class UncertaintyConfig(RunConfig):
    components_percent: dict[str, float] = Field(
        ..., min_length=1, description="Relative uncertainty components in percent."
    )

    @field_validator("components_percent")
    @classmethod
    def _non_negative(cls, v):
        for label, value in v.items():
            if value < 0:
                raise ValueError(f"Uncertainty component '{label}' must be >= 0, got {value}")
        return v

    def handler_kwargs(self) -> dict[str, Any]:
        return {"components": {k: v / 100.0 for k, v in self.components_percent.items()}}


class SessionConfig(RunConfig):
    session: str = Field(..., description="Measurement session YAML file.")
    components_percent: dict[str, float] | None = None

    @field_validator("session")
    @classmethod
    def _session_exists(cls, v):
        return _existing_path(v, "Session file")

    def handler_kwargs(self) -> dict[str, Any]:
        kwargs: dict[str, Any] = {"session": self.session}
        if self.components_percent is not None:
            kwargs["components"] = {k: v / 100.0 for k, v in self.components_percent.items()}
        return kwargs


class _CurveParams(RunConfig):
    preset: str | None = Field(None, description="Recovery preset name (default detector-fig3a).")
    curve: dict[str, Any] | None = Field(None, description="Inline recovery curve mapping.")


class DeadTimeConfig(_CurveParams):
    full_recovery_fraction: float = Field(0.99, gt=0, le=1)
    time_stop_ns: float = Field(200.0, gt=0)
    time_step_ns: float = Field(0.1, gt=0)


class DroopConfig(_CurveParams):
    eta_max: float | None = Field(None, ge=0, le=1)
    fluxes_per_s: list[float] | None = None
    flux_min_per_s: float = Field(1e2, gt=0)
    flux_max_per_s: float = Field(1e8, gt=0)
    points_per_decade: int = Field(10, ge=1)


class PulsedConfig(_CurveParams):
    repetition_period_ns: float = Field(..., gt=0)
    eta_max: float | None = Field(None, ge=0, le=1)


class SimulateConfig(_CurveParams):
    seed_path: ClassVar[tuple[str, ...] | None] = ("seed",)
    workers_setting: ClassVar[str | None] = "trial_workers"

    seed: int = Field(..., ge=0, lt=2**64)
    source: dict[str, Any] = Field(default_factory=lambda: {"kind": "cw", "rate_per_s": 679_000.0})
    duration_ns: float = Field(1e8, gt=0)
    eta_max: float | None = Field(None, ge=0, le=1)
    jitter_fwhm_ps: float = Field(0.0, ge=0)
    dark_rate_per_s: float = Field(0.0, ge=0)
    trials: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)


class AutocorrConfig(RunConfig):
    seed_path: ClassVar[tuple[str, ...] | None] = ("simulate", "seed")

    tag_file: str | None = None
    simulate: dict[str, Any] | None = Field(None, description="Inline simulation (same keys as 'simulate').")
    bin_width_ns: float = Field(1.0, gt=0)
    max_delay_ns: float = Field(200.0, gt=0)
    plateau_start_ns: float | None = Field(None, gt=0)

    @field_validator("tag_file")
    @classmethod
    def _tag_file_exists(cls, v):
        return _existing_path(v, "Time-tag file")

    @model_validator(mode="after")
    def _one_input(self):
        if (self.tag_file is None) == (self.simulate is None):
            raise ValueError("Give exactly one of tag_file or simulate")
        if self.simulate is not None and "seed" not in self.simulate:
            raise ValueError("An inline simulation needs a seed")
        return self


class FitIrfConfig(RunConfig):
    seed_path: ClassVar[tuple[str, ...] | None] = ("samples", "seed")

    histogram_file: str | None = None
    samples: dict[str, Any] | None = Field(None, description="Seeded Gaussian samples: fwhm_ps, count, seed.")
    bin_width_ps: float = Field(1.0, gt=0)
    sigma_floor_ps: float | None = Field(None, gt=0)

    @field_validator("histogram_file")
    @classmethod
    def _histogram_exists(cls, v):
        return _existing_path(v, "Histogram file")

    @model_validator(mode="after")
    def _one_input(self):
        if (self.histogram_file is None) == (self.samples is None):
            raise ValueError("Give exactly one of histogram_file or samples")
        if self.samples is not None and "seed" not in self.samples:
            raise ValueError("IRF samples need a seed")
        return self
