"""Handlers for the efficiency-measurement pipeline."""

import logging
from pathlib import Path
from typing import Any

from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.metrology.measurement import (
    analyze_session,
    calibrate_attenuation,
    chain_from_readings,
    combine_uncertainty,
    compute_sde,
    fresnel_end_face_reflection,
    load_session,
    metrology_defaults,
    photon_flux,
)
from snspd_toolkit.tools.metrology.metrology_types import AttenuationChain, PhotonFlux
from snspd_toolkit.tools.utils import Table, create_response

logger = logging.getLogger("snspd_toolkit")


def _band(defaults: dict[str, Any], check_band: bool) -> tuple[float, float] | None:
    band = defaults.get("ratio_band_db")
    return (float(band[0]), float(band[1])) if check_band and band else None


def _window(defaults: dict[str, Any]) -> tuple[float, float]:
    lo, hi = defaults["laser_window_nm"]
    return float(lo), float(hi)


def _chain(
    attenuation_db: float | None,
    calibration_readings: list[tuple[float, float]] | None,
    nd_stages_db: list[float] | None,
    band: tuple[float, float] | None,
) -> AttenuationChain:
    if calibration_readings:
        return chain_from_readings(calibration_readings, nd_stages_db or (), band)
    if attenuation_db is None:
        raise ValidationError("Give either attenuation_db or calibration_readings")
    return AttenuationChain(attenuation_db, tuple(nd_stages_db or ()), ratio_band_db=band)


def handle_metrology_flux(
    power_w: float,
    wavelength_nm: float,
    attenuation_db: float | None = None,
    calibration_readings: list[tuple[float, float]] | None = None,
    nd_stages_db: list[float] | None = None,
    check_band: bool = True,
) -> dict:
    """Photon flux at the detector from a monitor power and the attenuation chain.

    Arguments:
      power_w              - monitor-arm power (W)
      attenuation_db       - calibrated monitor-to-detector ratio (dB)
      calibration_readings - (P1, P2) pairs; replaces attenuation_db when given
      nd_stages_db         - ND stages ahead of the splitter (dB); recorded, not applied
      check_band           - enforce the calibrated ratio band from metrology.yml
    """
    defaults = metrology_defaults()
    chain = _chain(attenuation_db, calibration_readings, nd_stages_db, _band(defaults, check_band))
    flux = photon_flux(power_w, chain, wavelength_nm, _window(defaults))
    return create_response(
        {
            "power_at_detector_w": flux.power_at_detector_w,
            "wavelength_nm": flux.wavelength_nm,
            "flux_per_s": flux.flux_per_s,
            "ratio_db": chain.splitter_ratio_db,
            "source_nd_db": chain.source_nd_db,
        },
        metadata={"tool_name": "metrology_flux", "units": {"power": "W", "flux": "photons/s"}},
    )


def handle_metrology_calibrate(readings: list[tuple[float, float]]) -> dict:
    """Attenuation ratio (dB) and relative spread from repeated (P1, P2) readings."""
    ratio_db, spread = calibrate_attenuation(readings)
    return create_response(
        {"ratio_db": ratio_db, "ratio_relative_spread": spread, "readings": len(readings)},
        metadata={"tool_name": "metrology_calibrate"},
    )


def handle_metrology_sde(
    counts_per_s: float,
    wavelength_nm: float,
    dark_per_s: float = 0.0,
    flux_per_s: float | None = None,
    power_w: float | None = None,
    attenuation_db: float | None = None,
    nd_stages_db: list[float] | None = None,
    r_rfl: float | None = None,
    n_core: float = 1.45,
    n_outside: float = 1.0,
    components: dict[str, float] | None = None,
    check_band: bool = True,
) -> dict:
    """System detection efficiency with dark subtraction and end-face correction.

    The flux is either given directly (``flux_per_s``) or derived from
    ``power_w`` and ``attenuation_db``. Without ``r_rfl`` the Fresnel
    reflection of (n_core, n_outside) is used.
    """
    defaults = metrology_defaults()
    if flux_per_s is not None:
        flux = PhotonFlux.from_rate(flux_per_s, wavelength_nm)
    elif power_w is not None:
        chain = _chain(attenuation_db, None, nd_stages_db, _band(defaults, check_band))
        flux = photon_flux(power_w, chain, wavelength_nm, _window(defaults))
    else:
        raise ValidationError("Give either flux_per_s or power_w with attenuation_db")

    r_source = "given"
    if r_rfl is None:
        r_rfl = fresnel_end_face_reflection(n_core, n_outside)
        r_source = f"fresnel(n_core={n_core}, n_outside={n_outside})"

    if components is None:
        components = defaults.get("uncertainty_components") or {}
    budget = combine_uncertainty(components.items())
    result = compute_sde(counts_per_s, dark_per_s, flux, r_rfl, budget.total)
    return create_response(
        {
            "sde": result.sde,
            "over_unity": result.over_unity,
            "relative_uncertainty": result.uncertainty,
            "absolute_uncertainty": result.absolute_uncertainty,
            "r_rfl": result.r_rfl,
            "flux_per_s": flux.flux_per_s,
            "counts_per_s": result.counts_registered,
            "dark_per_s": result.dark_counts,
        },
        metadata={"tool_name": "metrology_sde", "r_rfl_source": r_source, "budget": budget.components},
    )


def handle_metrology_uncertainty(components: dict[str, float]) -> dict:
    """Root-sum-square of relative uncertainty components (fractions)."""
    budget = combine_uncertainty(components.items())
    return create_response(
        {
            "total": budget.total,
            "total_percent": 100.0 * budget.total,
            "components": [{"label": k, "relative": v} for k, v in budget.components],
        },
        metadata={"tool_name": "metrology_uncertainty", "method": "root-sum-square, uncorrelated"},
        tables=[Table("budget", ("label", "relative"), list(budget.components))],
    )


def handle_metrology_endFace(n_core: float = 1.45, n_outside: float = 1.0) -> dict:
    """Fresnel power reflection at the fiber end face."""
    return create_response(
        {"n_core": n_core, "n_outside": n_outside, "r_rfl": fresnel_end_face_reflection(n_core, n_outside)},
        metadata={"tool_name": "metrology_endFace"},
    )


def handle_metrology_session(session: str | Path | dict[str, Any], components: dict[str, float] | None = None) -> dict:
    """Analyse a measurement session file: calibration, per-record SDE, uncertainty budget."""
    data = session if isinstance(session, dict) else load_session(session)
    result = analyze_session(data, list(components.items()) if components else None)
    rows = [
        (
            stamp,
            r.flux.wavelength_nm,
            r.flux.flux_per_s,
            r.counts_registered,
            r.dark_counts,
            r.sde,
            r.absolute_uncertainty,
            r.over_unity,
        )
        for stamp, r in zip(result.timestamps, result.results)
    ]
    return create_response(
        {
            "ratio_db": result.ratio_db,
            "ratio_relative_spread": result.ratio_spread,
            "ratio_stable": result.ratio_stable,
            "budget_total": result.budget.total,
            "records": len(rows),
            "sde": [r.sde for r in result.results],
        },
        metadata={"tool_name": "metrology_session", "budget": result.budget.components},
        tables=[
            Table(
                "sde",
                (
                    "timestamp",
                    "wavelength_nm",
                    "flux_per_s",
                    "counts_per_s",
                    "dark_per_s",
                    "sde",
                    "sde_uncertainty",
                    "over_unity",
                ),
                rows,
            )
        ],
    )
