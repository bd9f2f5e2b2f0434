"""Dead-time metrics and count-rate dependent efficiency of a recovering detector."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from scipy import integrate, optimize

from snspd_toolkit import config_loader
from snspd_toolkit.errors import NumericError, UnreachableThresholdError, ValidationError
from snspd_toolkit.tools.dynamics.dynamics_types import (
    BISECTION_XTOL_NS,
    DeadTimeMetrics,
    ElectricalPulse,
    RecoveryCurve,
    pulse_one_over_e_time,
)

logger = logging.getLogger("snspd_toolkit")

CANONICAL_PRESET = "detector-fig3a"
DEFAULT_FULL_RECOVERY_FRACTION = 0.99


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------
def curve_from_mapping(name: str, spec: dict[str, Any]) -> RecoveryCurve:
    """Build a curve from a preset entry; the pulse is either electrical or given by time constants."""
    spec = dict(spec)
    pulse = dict(spec.pop("pulse", {}) or {})
    try:
        if "kinetic_inductance_nh" in pulse:
            electrical = ElectricalPulse(**pulse)
            tau_fall, tau_rise = electrical.tau_fall_ns, electrical.tau_rise_ns
        else:
            tau_fall = float(pulse.get("tau_fall_ns", spec.pop("tau_fall_ns", 0.0)))
            tau_rise = float(pulse.get("tau_rise_ns", spec.pop("tau_rise_ns", 0.0)))
        return RecoveryCurve(tau_fall_ns=tau_fall, tau_rise_ns=tau_rise, name=name, **spec)
    except TypeError as e:
        raise ValidationError(f"Recovery preset '{name}' has invalid fields: {e}") from e


def load_recovery_preset(name: str = CANONICAL_PRESET, eta_max: float | None = None) -> RecoveryCurve:
    """Named curve from ``recovery_presets.yml``, optionally with a different η_max."""
    presets = config_loader.load_config("recovery_presets.yml")
    if name not in presets:
        raise ValidationError(f"Unknown recovery preset '{name}'. Available: {sorted(presets)}")
    spec = dict(presets[name])
    if eta_max is not None:
        spec["eta_max"] = eta_max
    return curve_from_mapping(name, spec)


def recovery_from_metrics(
    tau1_ns: float,
    tau2_ns: float,
    tau3_ns: float,
    tau4_ns: float,
    load_resistance_ohm: float = 50.0,
    hotspot_resistance_ohm: float = 4950.0,
    eta_max: float = 1.0,
    name: str = "",
) -> tuple[RecoveryCurve, ElectricalPulse]:
    """Curve and electrical pulse reproducing four measured dead times.

    t_blind = τ₁; τ_eff places the half-recovery at τ₃; the cap snaps to full
    recovery at τ₄; L_k is scaled so the pulse 1/e time equals τ₂.
    """
    if not 0 <= tau1_ns < tau3_ns < tau4_ns:
        raise ValidationError(f"Need tau1 < tau3 < tau4, got {tau1_ns}, {tau3_ns}, {tau4_ns}")
    tau_eff = (tau3_ns - tau1_ns) / math.log(2.0)
    cap = -math.expm1(-(tau4_ns - tau1_ns) / tau_eff)
    ratio = load_resistance_ohm / (load_resistance_ohm + hotspot_resistance_ohm)
    # τ₂ per unit τ_fall, solved at the τ₂ scale
    shape = pulse_one_over_e_time(ratio * tau2_ns, tau2_ns) / tau2_ns if ratio > 0 else 1.0
    tau_fall = tau2_ns / shape
    pulse = ElectricalPulse(tau_fall * load_resistance_ohm, load_resistance_ohm, hotspot_resistance_ohm)
    curve = RecoveryCurve.from_electrical(pulse, tau1_ns, tau_eff, cap_fraction=cap, eta_max=eta_max, name=name)
    return curve, pulse


# ---------------------------------------------------------------------------
# Dead-time metrics
# ---------------------------------------------------------------------------
def _first_crossing(curve: RecoveryCurve, fraction: float) -> float:
    """First t with η_rel(t) ≥ fraction, by bisection to BISECTION_XTOL_NS."""
    lo = curve.t_blind_ns
    if curve.efficiency_recovery(lo) >= fraction:
        return lo
    if fraction >= 1.0 and curve.cap_fraction is None:
        raise UnreachableThresholdError(
            f"Recovery curve '{curve.name or 'unnamed'}' approaches but never reaches its maximum"
        )
    hi = curve.full_recovery_ns
    return float(optimize.bisect(lambda t: curve.efficiency_recovery(t) - fraction, lo, hi, xtol=BISECTION_XTOL_NS))


def dead_time_metrics(
    curve: RecoveryCurve, full_recovery_fraction: float = DEFAULT_FULL_RECOVERY_FRACTION
) -> DeadTimeMetrics:
    """τ₁ minimum separation, τ₂ pulse 1/e time, τ₃ half (−3 dB) recovery, τ₄ full recovery."""
    if not 0.0 < full_recovery_fraction <= 1.0:
        raise ValidationError(f"full_recovery_fraction must lie in (0, 1], got {full_recovery_fraction}")
    return DeadTimeMetrics(
        tau1_min_separation_ns=curve.t_blind_ns,
        tau2_one_over_e_ns=pulse_one_over_e_time(curve.tau_rise_ns, curve.tau_fall_ns),
        tau3_minus3db_ns=_first_crossing(curve, 0.5),
        tau4_full_recovery_ns=_first_crossing(curve, full_recovery_fraction),
        full_recovery_fraction=full_recovery_fraction,
    )


# ---------------------------------------------------------------------------
# Count-rate dependence
# ---------------------------------------------------------------------------
def _detection_hazard_integral(curve: RecoveryCurve, t: float) -> float:
    """∫₀ᵗ η_rel(s) ds."""
    if t <= curve.t_blind_ns:
        return 0.0
    x = t - curve.t_blind_ns
    if curve.tau_eff_ns == 0:
        return x
    t_full = curve.full_recovery_ns
    ramp = min(x, t_full - curve.t_blind_ns)
    area = ramp + curve.tau_eff_ns * math.expm1(-ramp / curve.tau_eff_ns)
    return area + max(t - t_full, 0.0)


def rate_dependent_efficiency_analytic(
    curve: RecoveryCurve, flux_per_s: float, eta_max: float | None = None
) -> float:
    """Registered rate / incident rate for Poisson arrivals on a non-paralyzable detector.

    After a detection the next one occurs at the first photon that is
    detected, with hazard Φ·η_max·η_rel(t). The survival function is
    S(t) = exp(−Φ·η_max·∫₀ᵗ η_rel), the mean spacing E[T] = ∫₀^∞ S(t) dt, and
    the efficiency is 1/(Φ·E[T]). Beyond full recovery S decays exponentially,
    so the tail integrates in closed form.
    """
    if flux_per_s < 0:
        raise ValidationError(f"Photon flux must be >= 0, got {flux_per_s}")
    eta = curve.eta_max if eta_max is None else float(eta_max)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta_max must lie in [0, 1], got {eta}")
    if flux_per_s == 0 or eta == 0:
        return eta

    phi = flux_per_s * 1e-9  # photons per ns
    rate = phi * eta
    t_blind, t_full = curve.t_blind_ns, curve.full_recovery_ns

    def survival(t: float) -> float:
        return math.exp(-rate * _detection_hazard_integral(curve, t))

    ramp = 0.0
    if t_full > t_blind:
        ramp, err = integrate.quad(survival, t_blind, t_full, limit=200, epsabs=1e-12, epsrel=1e-12)
        if not math.isfinite(ramp) or err > 1e-8 * max(ramp, 1.0):
            raise NumericError(f"Survival integral did not converge (estimate {ramp}, error {err})")
    mean_spacing = t_blind + ramp + survival(t_full) / rate
    return 1.0 / (phi * mean_spacing)


def efficiency_vs_flux(
    curve: RecoveryCurve, fluxes_per_s: Sequence[float], eta_max: float | None = None
) -> np.ndarray:
    """Rate-dependent efficiency over a list of fluxes."""
    return np.array([rate_dependent_efficiency_analytic(curve, float(f), eta_max) for f in fluxes_per_s])


def pulsed_source_efficiency(curve: RecoveryCurve, repetition_period_ns: float, eta_max: float | None = None) -> float:
    """Efficiency for one photon per pulse when every pulse is detected (worst case)."""
    if repetition_period_ns <= 0:
        raise ValidationError(f"Repetition period must be > 0 ns, got {repetition_period_ns}")
    eta = curve.eta_max if eta_max is None else float(eta_max)
    return eta * curve.efficiency_recovery(repetition_period_ns)
