"""Attenuation calibration, photon flux, SDE with end-face correction, uncertainty budget.

SDE = (1 − R_rfl) · (N_count − N_dark) / N_total with N_total = P·λ/(hc).
Relative uncertainty terms are treated as uncorrelated and combined by
root-sum-square.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from snspd_toolkit import config_loader
from snspd_toolkit.errors import RangeError, ValidationError
from snspd_toolkit.tools.metrology.metrology_types import (
    DEFAULT_LASER_WINDOW_NM,
    DEFAULT_RATIO_BAND_DB,
    AttenuationChain,
    PhotonFlux,
    PowerMeter,
    SdeResult,
    SessionRecord,
    SessionResult,
    UncertaintyBudget,
)

logger = logging.getLogger("snspd_toolkit")


def metrology_defaults() -> dict[str, Any]:
    """Packaged metrology.yml merged with the config directory's copy."""
    return config_loader.load_config(
        "metrology.yml",
        defaults={
            "laser_window_nm": list(DEFAULT_LASER_WINDOW_NM),
            "ratio_band_db": list(DEFAULT_RATIO_BAND_DB),
            "power_meters": {},
            "uncertainty_components": {},
        },
    )


# ---------------------------------------------------------------------------
# Attenuation and flux
# ---------------------------------------------------------------------------
def calibrate_attenuation(readings: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Mean ratio in dB of (P1, P2) pairs and the relative spread (max − min)/mean of the linear ratios."""
    pairs = [(float(p1), float(p2)) for p1, p2 in readings]
    if not pairs:
        raise ValidationError("Attenuation calibration needs at least one (P1, P2) reading")
    for p1, p2 in pairs:
        if p1 <= 0 or p2 <= 0:
            raise ValidationError(f"Calibration powers must be > 0 W, got ({p1}, {p2})")
    ratios = np.array([p1 / p2 for p1, p2 in pairs])
    ratio_db = float(np.mean(10.0 * np.log10(ratios)))
    spread = float((ratios.max() - ratios.min()) / ratios.mean())
    return ratio_db, spread


def chain_from_readings(
    readings: Sequence[tuple[float, float]],
    nd_stages_db: Sequence[float] = (),
    ratio_band_db: tuple[float, float] | None = DEFAULT_RATIO_BAND_DB,
) -> AttenuationChain:
    ratio_db, spread = calibrate_attenuation(readings)
    logger.info("Calibrated attenuation", extra={"ratio_db": ratio_db, "spread": spread, "readings": len(readings)})
    return AttenuationChain(
        splitter_ratio_db=ratio_db,
        nd_stages_db=tuple(nd_stages_db),
        calibration_readings=tuple(readings),
        ratio_band_db=ratio_band_db,
    )


def photon_flux(
    p_monitor_w: float,
    chain: AttenuationChain,
    wavelength_nm: float,
    laser_window_nm: tuple[float, float] | None = DEFAULT_LASER_WINDOW_NM,
) -> PhotonFlux:
    """Photons per second at the detector for a monitor-arm power reading.

    Only the calibrated ratio attenuates the monitor reading; source-side ND
    stages are already part of it.
    """
    if p_monitor_w <= 0:
        raise ValidationError(f"Monitor power must be > 0 W, got {p_monitor_w}")
    if laser_window_nm is not None:
        lo, hi = laser_window_nm
        if not lo <= wavelength_nm <= hi:
            raise RangeError(f"Wavelength {wavelength_nm} nm is outside the laser window [{lo:g}, {hi:g}] nm")
    return PhotonFlux.from_power(p_monitor_w * chain.linear_factor, wavelength_nm)


# ---------------------------------------------------------------------------
# SDE
# ---------------------------------------------------------------------------
def compute_sde(
    counts_per_s: float,
    dark_per_s: float,
    flux: PhotonFlux,
    r_rfl: float,
    uncertainty: float = 0.0,
) -> SdeResult:
    """(1 − R_rfl)·(counts − dark)/flux. Over-unity results are flagged, not clamped."""
    if dark_per_s < 0:
        raise ValidationError(f"Dark count rate must be >= 0, got {dark_per_s}")
    if counts_per_s < dark_per_s:
        raise ValidationError(f"Registered counts {counts_per_s}/s are below the dark count rate {dark_per_s}/s")
    if flux.flux_per_s <= 0:
        raise ValidationError("Photon flux must be > 0")
    if not 0.0 <= r_rfl < 1.0:
        raise ValidationError(f"End-face reflection must lie in [0, 1), got {r_rfl}")
    sde = (1.0 - r_rfl) * ((counts_per_s - dark_per_s) / flux.flux_per_s)
    result = SdeResult(
        counts_registered=counts_per_s,
        dark_counts=dark_per_s,
        flux=flux,
        r_rfl=r_rfl,
        sde=sde,
        uncertainty=uncertainty,
    )
    if result.over_unity:
        logger.warning(
            "SDE above unity: check attenuator and power-meter calibration",
            extra={"sde": sde, "counts_per_s": counts_per_s, "flux_per_s": flux.flux_per_s},
        )
    return result


def counts_for_sde(sde: float, dark_per_s: float, flux: PhotonFlux, r_rfl: float) -> float:
    """Registered count rate that :func:`compute_sde` maps to ``sde``."""
    return sde * flux.flux_per_s / (1.0 - r_rfl) + dark_per_s


def fresnel_end_face_reflection(n_core: float, n_outside: float) -> float:
    """Normal-incidence power reflection at the fiber end face."""
    if n_core <= 0 or n_outside <= 0:
        raise ValidationError(f"Refractive indices must be > 0, got ({n_core}, {n_outside})")
    return ((n_core - n_outside) / (n_core + n_outside)) ** 2


def combine_uncertainty(components: Iterable[tuple[str, float]]) -> UncertaintyBudget:
    """Root-sum-square of relative uncertainty terms."""
    items = tuple((str(label), float(value)) for label, value in components)
    for label, value in items:
        if value < 0 or not math.isfinite(value):
            raise ValidationError(f"Uncertainty component '{label}' must be a finite value >= 0, got {value}")
    total = math.sqrt(math.fsum(value * value for _, value in items))
    return UncertaintyBudget(components=items, total=total)


# ---------------------------------------------------------------------------
# Power meters and sessions
# ---------------------------------------------------------------------------
def power_meters(defaults: dict[str, Any] | None = None) -> dict[str, PowerMeter]:
    data = (defaults or metrology_defaults()).get("power_meters") or {}
    return {name: PowerMeter(name=name, **spec) for name, spec in data.items()}


def normalize_readings(readings_w: Sequence[float], meter: PowerMeter) -> list[float]:
    """Rescale a meter's readings onto the reference meter."""
    return [float(p) * meter.normalization for p in readings_w]


def _optional_float(value: Any) -> float | None:
    return None if value is None else float(value)


def _record(raw: dict[str, Any], default_wavelength: float | None, i: int) -> SessionRecord:
    try:
        return SessionRecord(
            timestamp=str(raw.get("timestamp", f"record-{i}")),
            p1_w=float(raw["P1"]),
            p2_w=_optional_float(raw.get("P2")),
            wavelength_nm=_optional_float(raw.get("wavelength_nm", default_wavelength)),
            counts_per_s=_optional_float(raw.get("counts_per_s")),
            dark_per_s=float(raw.get("dark_per_s") or 0.0),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"Session record {i} is malformed: {e}") from e


def load_session(path: str | Path) -> dict[str, Any]:
    """Read a session YAML file: header keys plus a ``records`` list."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Session file not found: {path}")
    data = config_loader.load_yaml(path)
    if not isinstance(data.get("records"), list):
        raise ValidationError(f"Session file {path} needs a 'records' list")
    return data


def analyze_session(
    session: dict[str, Any],
    components: Sequence[tuple[str, float]] | None = None,
    defaults: dict[str, Any] | None = None,
) -> SessionResult:
    """Calibrate the chain from the session's P1/P2 records and evaluate SDE for each count record.

    Session keys: ``records``, optional ``wavelength_nm``, ``nd_stages_db``,
    ``r_rfl`` (or ``fiber: {n_core, n_outside}``), ``meter``.
    """
    defaults = defaults or metrology_defaults()
    default_wl = session.get("wavelength_nm")
    records = [_record(raw, default_wl, i) for i, raw in enumerate(session["records"])]

    meter = None
    if session.get("meter"):
        meters = power_meters(defaults)
        if session["meter"] not in meters:
            raise ValidationError(f"Unknown power meter '{session['meter']}'. Available: {sorted(meters)}")
        meter = meters[session["meter"]]

    def scaled(p: float) -> float:
        return normalize_readings([p], meter)[0] if meter else p

    calibration = [(scaled(r.p1_w), scaled(r.p2_w)) for r in records if r.is_calibration and r.p2_w is not None]
    if not calibration:
        raise ValidationError("Session has no calibration records (P1 and P2)")
    band = session.get("ratio_band_db", defaults.get("ratio_band_db"))
    chain = chain_from_readings(calibration, session.get("nd_stages_db", ()), tuple(band) if band else None)
    _, spread = calibrate_attenuation(calibration)

    if "r_rfl" in session:
        r_rfl = float(session["r_rfl"])
    elif "fiber" in session:
        r_rfl = fresnel_end_face_reflection(float(session["fiber"]["n_core"]), float(session["fiber"]["n_outside"]))
    else:
        raise ValidationError("Session needs 'r_rfl' or 'fiber: {n_core, n_outside}' for the end-face correction")

    if components is None:
        components = [(k, float(v)) for k, v in (defaults.get("uncertainty_components") or {}).items()]
    budget = combine_uncertainty(components)
    attenuator = dict(components).get("attenuator")
    stable = attenuator is None or spread <= attenuator
    if not stable:
        logger.warning(
            "Attenuation ratio drifted beyond the attenuator uncertainty",
            extra={"spread": spread, "attenuator_uncertainty": attenuator},
        )

    lo, hi = defaults.get("laser_window_nm") or DEFAULT_LASER_WINDOW_NM
    window = (float(lo), float(hi))
    results, stamps = [], []
    for r in records:
        if not r.is_measurement:
            continue
        if r.wavelength_nm is None or r.counts_per_s is None:
            raise ValidationError(f"Measurement record '{r.timestamp}' has no wavelength")
        flux = photon_flux(scaled(r.p1_w), chain, r.wavelength_nm, window)
        results.append(compute_sde(r.counts_per_s, r.dark_per_s, flux, r_rfl, budget.total))
        stamps.append(r.timestamp)

    return SessionResult(
        ratio_db=chain.splitter_ratio_db,
        ratio_spread=spread,
        ratio_stable=stable,
        budget=budget,
        results=tuple(results),
        timestamps=tuple(stamps),
    )
