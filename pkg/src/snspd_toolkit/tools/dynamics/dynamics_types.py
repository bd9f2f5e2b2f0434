"""Domain types for detector recovery: electrical pulse, efficiency recovery, dead-time metrics.

Times are in ns. The efficiency recovery after a detection is

    η_rel(t) = 0                               t < t_blind
    η_rel(t) = 1 − exp(−(t − t_blind)/τ_eff)    t_blind ≤ t < t_full
    η_rel(t) = 1                               t ≥ t_full

with t_full = t_blind + τ_eff·ln(1/(1 − cap_fraction)). Without a cap the
curve is treated as recovered once 1 − η_rel < e^-40. τ_eff = 0 is a step
(classic non-paralyzable dead time of length t_blind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from snspd_toolkit.errors import ValidationError

# Metric root finding resolution (ns)
BISECTION_XTOL_NS = 0.01
_UNCAPPED_TAIL = 40.0


@dataclass(frozen=True)
class ElectricalPulse:
    """Kinetic-inductance readout: τ_rise = L_k/(R_load + R_hotspot), τ_fall = L_k/R_load (nH/Ω = ns)."""

    kinetic_inductance_nh: float
    load_resistance_ohm: float = 50.0
    hotspot_resistance_ohm: float = 5000.0

    def __post_init__(self):
        if self.kinetic_inductance_nh <= 0 or self.load_resistance_ohm <= 0 or self.hotspot_resistance_ohm < 0:
            raise ValidationError("Electrical pulse needs L_k > 0, R_load > 0 and R_hotspot >= 0")

    @property
    def tau_rise_ns(self) -> float:
        return self.kinetic_inductance_nh / (self.load_resistance_ohm + self.hotspot_resistance_ohm)

    @property
    def tau_fall_ns(self) -> float:
        return self.kinetic_inductance_nh / self.load_resistance_ohm


def _pulse_peak_time(tau_rise: float, tau_fall: float) -> float:
    if tau_rise == 0:
        return 0.0
    return tau_rise * tau_fall / (tau_fall - tau_rise) * math.log(tau_fall / tau_rise)


def _pulse_shape(t: np.ndarray, tau_rise: float, tau_fall: float) -> np.ndarray:
    t = np.maximum(t, 0.0)
    if tau_rise == 0:
        return np.exp(-t / tau_fall)
    return np.exp(-t / tau_fall) - np.exp(-t / tau_rise)


def pulse_one_over_e_time(tau_rise: float, tau_fall: float) -> float:
    """Time for the pulse to fall from its peak to 1/e of the peak, measured from the peak."""
    if tau_rise == 0:
        return tau_fall
    t_peak = _pulse_peak_time(tau_rise, tau_fall)
    peak = float(_pulse_shape(np.array(t_peak), tau_rise, tau_fall))
    target = peak / math.e

    def f(t: float) -> float:
        return float(_pulse_shape(np.array(t), tau_rise, tau_fall)) - target

    t_end = t_peak + 50.0 * tau_fall
    return float(optimize.bisect(f, t_peak, t_end, xtol=BISECTION_XTOL_NS)) - t_peak


@dataclass(frozen=True)
class RecoveryCurve:
    """Pulse shape and efficiency recovery of a detector after a registered event."""

    t_blind_ns: float
    tau_eff_ns: float
    tau_fall_ns: float
    tau_rise_ns: float = 0.0
    cap_fraction: float | None = None
    eta_max: float = 1.0
    name: str = ""

    def __post_init__(self):
        if self.t_blind_ns < 0 or self.tau_eff_ns < 0:
            raise ValidationError("Recovery curve needs t_blind >= 0 and tau_eff >= 0")
        if self.tau_fall_ns <= 0 or self.tau_rise_ns < 0 or self.tau_rise_ns >= self.tau_fall_ns:
            raise ValidationError(
                f"Pulse needs 0 <= tau_rise < tau_fall, got tau_rise={self.tau_rise_ns}, tau_fall={self.tau_fall_ns}"
            )
        if self.cap_fraction is not None and not 0.0 < self.cap_fraction < 1.0:
            raise ValidationError(f"cap_fraction must lie in (0, 1), got {self.cap_fraction}")
        if not 0.0 <= self.eta_max <= 1.0:
            raise ValidationError(f"eta_max must lie in [0, 1], got {self.eta_max}")
        tau2 = pulse_one_over_e_time(self.tau_rise_ns, self.tau_fall_ns)
        tau3 = self.half_recovery_ns
        # ordering is checked to the metric resolution
        if not self.t_blind_ns - BISECTION_XTOL_NS <= tau2 <= tau3 + BISECTION_XTOL_NS:
            raise ValidationError(
                f"Dead-time ordering violated: t_blind={self.t_blind_ns:.4g} ns, 1/e pulse time={tau2:.4g} ns, "
                f"half recovery={tau3:.4g} ns"
            )

    @classmethod
    def from_electrical(
        cls,
        pulse: ElectricalPulse,
        t_blind_ns: float,
        tau_eff_ns: float,
        cap_fraction: float | None = None,
        eta_max: float = 1.0,
        name: str = "",
    ) -> RecoveryCurve:
        return cls(
            t_blind_ns=t_blind_ns,
            tau_eff_ns=tau_eff_ns,
            tau_fall_ns=pulse.tau_fall_ns,
            tau_rise_ns=pulse.tau_rise_ns,
            cap_fraction=cap_fraction,
            eta_max=eta_max,
            name=name,
        )

    @classmethod
    def step(cls, dead_time_ns: float, eta_max: float = 1.0, name: str = "step") -> RecoveryCurve:
        """Non-paralyzable dead time: blind for ``dead_time_ns``, then fully efficient."""
        return cls(
            t_blind_ns=dead_time_ns,
            tau_eff_ns=0.0,
            tau_fall_ns=max(dead_time_ns, 1e-3),
            eta_max=eta_max,
            name=name,
        )

    @property
    def full_recovery_ns(self) -> float:
        """t_full: from here on η_rel = 1."""
        if self.tau_eff_ns == 0:
            return self.t_blind_ns
        tail = _UNCAPPED_TAIL if self.cap_fraction is None else math.log(1.0 / (1.0 - self.cap_fraction))
        return self.t_blind_ns + self.tau_eff_ns * tail

    @property
    def half_recovery_ns(self) -> float:
        """Closed-form first time with η_rel ≥ 0.5."""
        if self.tau_eff_ns == 0:
            return self.t_blind_ns
        return min(self.t_blind_ns + self.tau_eff_ns * math.log(2.0), self.full_recovery_ns)

    def efficiency_recovery(self, t_ns: float) -> float:
        """η_rel(t) ∈ [0, 1] for a scalar time since the last detection."""
        if t_ns < self.t_blind_ns:
            return 0.0
        if t_ns >= self.full_recovery_ns:
            return 1.0
        return -math.expm1(-(t_ns - self.t_blind_ns) / self.tau_eff_ns)

    def efficiency_recovery_array(self, t_ns) -> np.ndarray:
        t = np.asarray(t_ns, dtype=float)
        out = np.ones_like(t)
        out[t < self.t_blind_ns] = 0.0
        ramp = (t >= self.t_blind_ns) & (t < self.full_recovery_ns)
        if self.tau_eff_ns > 0:
            out[ramp] = -np.expm1(-(t[ramp] - self.t_blind_ns) / self.tau_eff_ns)
        return out

    def efficiency(self, t_ns: float) -> float:
        """η(t) = η_max·η_rel(t)."""
        return self.eta_max * self.efficiency_recovery(t_ns)

    def pulse_amplitude(self, t_ns) -> np.ndarray:
        """Double-exponential readout pulse normalised to a peak of 1.0."""
        t_peak = _pulse_peak_time(self.tau_rise_ns, self.tau_fall_ns)
        peak = float(_pulse_shape(np.array(t_peak), self.tau_rise_ns, self.tau_fall_ns))
        return _pulse_shape(np.asarray(t_ns, dtype=float), self.tau_rise_ns, self.tau_fall_ns) / peak

    @property
    def pulse_peak_ns(self) -> float:
        return _pulse_peak_time(self.tau_rise_ns, self.tau_fall_ns)


@dataclass(frozen=True)
class DeadTimeMetrics:
    tau1_min_separation_ns: float
    tau2_one_over_e_ns: float
    tau3_minus3db_ns: float
    tau4_full_recovery_ns: float
    full_recovery_fraction: float = 0.99

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (
            self.tau1_min_separation_ns,
            self.tau2_one_over_e_ns,
            self.tau3_minus3db_ns,
            self.tau4_full_recovery_ns,
        )
