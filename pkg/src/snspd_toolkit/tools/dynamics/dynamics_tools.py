"""Handlers for recovery dynamics: dead-time metrics, rate droop, pulsed operation."""

import logging
from typing import Any

import numpy as np

from snspd_toolkit.tools.dynamics.dynamics_types import RecoveryCurve
from snspd_toolkit.tools.dynamics.recovery import (
    CANONICAL_PRESET,
    DEFAULT_FULL_RECOVERY_FRACTION,
    curve_from_mapping,
    dead_time_metrics,
    efficiency_vs_flux,
    load_recovery_preset,
    pulsed_source_efficiency,
)
from snspd_toolkit.tools.utils import Table, create_response

logger = logging.getLogger("snspd_toolkit")


def resolve_curve(preset: str | None = None, curve: dict[str, Any] | None = None, eta_max: float | None = None) -> RecoveryCurve:
    """An inline curve mapping wins over a preset name."""
    if curve:
        spec = dict(curve)
        if eta_max is not None:
            spec["eta_max"] = eta_max
        return curve_from_mapping(spec.pop("name", "inline"), spec)
    return load_recovery_preset(preset or CANONICAL_PRESET, eta_max=eta_max)


def _curve_metadata(curve: RecoveryCurve) -> dict[str, Any]:
    return {
        "name": curve.name,
        "t_blind_ns": curve.t_blind_ns,
        "tau_eff_ns": curve.tau_eff_ns,
        "cap_fraction": curve.cap_fraction,
        "tau_fall_ns": curve.tau_fall_ns,
        "tau_rise_ns": curve.tau_rise_ns,
        "eta_max": curve.eta_max,
        "full_recovery_ns": curve.full_recovery_ns,
    }


def handle_dynamics_deadTime(
    preset: str | None = None,
    curve: dict[str, Any] | None = None,
    full_recovery_fraction: float = DEFAULT_FULL_RECOVERY_FRACTION,
    time_stop_ns: float = 200.0,
    time_step_ns: float = 0.1,
) -> dict:
    """τ₁..τ₄ of a recovery curve plus a sampled pulse/efficiency trace."""
    rc = resolve_curve(preset, curve)
    metrics = dead_time_metrics(rc, full_recovery_fraction)
    t = np.arange(0.0, time_stop_ns + 0.5 * time_step_ns, time_step_ns)
    trace = np.column_stack([t, rc.pulse_amplitude(t), rc.eta_max * rc.efficiency_recovery_array(t)])
    return create_response(
        metrics,
        metadata={"tool_name": "dynamics_deadTime", "curve": _curve_metadata(rc), "units": {"time": "ns"}},
        tables=[Table("recovery", ("t_ns", "pulse_amplitude", "efficiency"), trace)],
    )


def handle_dynamics_droop(
    preset: str | None = None,
    curve: dict[str, Any] | None = None,
    eta_max: float | None = None,
    fluxes_per_s: list[float] | None = None,
    flux_min_per_s: float = 1e2,
    flux_max_per_s: float = 1e8,
    points_per_decade: int = 10,
) -> dict:
    """Rate-dependent efficiency over a flux list or a logarithmic flux grid."""
    rc = resolve_curve(preset, curve, eta_max)
    if fluxes_per_s:
        fluxes = np.asarray(fluxes_per_s, dtype=float)
    else:
        decades = np.log10(flux_max_per_s) - np.log10(flux_min_per_s)
        count = max(int(round(decades * points_per_decade)) + 1, 2)
        fluxes = np.logspace(np.log10(flux_min_per_s), np.log10(flux_max_per_s), count)
    efficiencies = efficiency_vs_flux(rc, fluxes)
    rows = np.column_stack([fluxes, efficiencies, efficiencies * fluxes])
    return create_response(
        {
            "eta_max": rc.eta_max,
            "points": [{"flux_per_s": f, "efficiency": e} for f, e in zip(fluxes, efficiencies)],
        },
        metadata={"tool_name": "dynamics_droop", "curve": _curve_metadata(rc), "model": "non-paralyzable renewal"},
        tables=[Table("droop", ("flux_per_s", "efficiency", "registered_per_s"), rows)],
    )


def handle_dynamics_pulsed(
    repetition_period_ns: float,
    preset: str | None = None,
    curve: dict[str, Any] | None = None,
    eta_max: float | None = None,
) -> dict:
    """Worst-case efficiency for a pulsed single-photon source."""
    rc = resolve_curve(preset, curve, eta_max)
    return create_response(
        {
            "repetition_period_ns": repetition_period_ns,
            "efficiency": pulsed_source_efficiency(rc, repetition_period_ns),
        },
        metadata={"tool_name": "dynamics_pulsed", "curve": _curve_metadata(rc)},
    )
