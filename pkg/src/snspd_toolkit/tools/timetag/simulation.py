"""Monte Carlo photon streams seen through a recovering detector."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.dynamics.dynamics_types import RecoveryCurve
from snspd_toolkit.tools.timetag.timetag_types import (
    FWHM_PER_SIGMA,
    TAG_RESOLUTION_NS,
    CwSource,
    PhotonStatistics,
    PulsedSource,
    SourceModel,
    TimeTagStream,
)

logger = logging.getLogger("snspd_toolkit")


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator per (seed, trial)."""
    if seed < 0 or trial < 0:
        raise ValidationError(f"Seed and trial index must be >= 0, got seed={seed}, trial={trial}")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def photon_arrivals(source: SourceModel, duration_ns: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted photon arrival times in [0, duration)."""
    if isinstance(source, CwSource):
        n = rng.poisson(source.rate_per_s * duration_ns * 1e-9)
        return np.sort(rng.uniform(0.0, duration_ns, n))
    pulses = np.arange(math.ceil(duration_ns / source.period_ns)) * source.period_ns
    pulses = pulses[pulses < duration_ns]
    if source.statistics is PhotonStatistics.POISSON:
        per_pulse = rng.poisson(source.mean_photons_per_pulse, pulses.size)
    else:
        per_pulse = np.full(pulses.size, int(source.mean_photons_per_pulse))
    return np.repeat(pulses, per_pulse)


def detect(arrivals: np.ndarray, curve: RecoveryCurve, eta_max: float, rng: np.random.Generator) -> np.ndarray:
    """Thin the arrivals with η_max·η_rel(t − t_last_detection); the detector starts recovered."""
    if eta_max == 0 or arrivals.size == 0:
        return np.empty(0)
    draws = rng.random(arrivals.size)
    detected = np.zeros(arrivals.size, dtype=bool)
    t_blind, t_full, tau = curve.t_blind_ns, curve.full_recovery_ns, curve.tau_eff_ns
    t_last = -math.inf
    # sequential: every decision depends on the previous detection
    for i, t in enumerate(arrivals.tolist()):
        dt = t - t_last
        if dt < t_blind:
            continue
        p = eta_max if dt >= t_full else eta_max * -math.expm1(-(dt - t_blind) / tau)
        if draws[i] < p:
            detected[i] = True
            t_last = t
    return arrivals[detected]


def simulate_stream(
    source: SourceModel,
    curve: RecoveryCurve,
    duration_ns: float,
    seed: int,
    eta_max: float | None = None,
    jitter_fwhm_ps: float = 0.0,
    dark_rate_per_s: float = 0.0,
    trial: int = 0,
) -> TimeTagStream:
    """Detected time tags for one trial; identical arguments give an identical stream."""
    if not duration_ns > 0:
        raise ValidationError(f"Duration must be > 0 ns, got {duration_ns}")
    if jitter_fwhm_ps < 0 or dark_rate_per_s < 0:
        raise ValidationError("Jitter FWHM and dark count rate must be >= 0")
    eta = curve.eta_max if eta_max is None else float(eta_max)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta_max must lie in [0, 1], got {eta}")

    rng = trial_rng(seed, trial)
    arrivals = photon_arrivals(source, duration_ns, rng)
    signal = detect(arrivals, curve, eta, rng)
    if jitter_fwhm_ps > 0 and signal.size:
        sigma_ns = jitter_fwhm_ps / FWHM_PER_SIGMA * 1e-3
        signal = signal + rng.normal(0.0, sigma_ns, signal.size)
    darks = rng.uniform(0.0, duration_ns, rng.poisson(dark_rate_per_s * duration_ns * 1e-9))

    merged = np.concatenate([signal, darks])
    merged = np.clip(np.round(merged / TAG_RESOLUTION_NS) * TAG_RESOLUTION_NS, 0.0, duration_ns)
    tags = np.unique(merged)
    if tags.size < merged.size:
        logger.debug("Coincident time tags merged", extra={"merged": int(merged.size - tags.size), "trial": trial})

    meta = {
        "seed": int(seed),
        "trial": int(trial),
        "source": source.describe(),
        "recovery": curve.name or "inline",
        "eta_max": eta,
        "jitter_fwhm_ps": jitter_fwhm_ps,
        "dark_rate_per_s": dark_rate_per_s,
        "duration_ns": duration_ns,
        "n_emitted": int(arrivals.size),
        "n_signal": int(signal.size),
        "n_dark": int(darks.size),
    }
    return TimeTagStream(tags=tags, duration_ns=duration_ns, meta=meta)


def _run_trial(trial: int, **kwargs) -> TimeTagStream:
    return simulate_stream(trial=trial, **kwargs)


def simulate_trials(
    source: SourceModel,
    curve: RecoveryCurve,
    duration_ns: float,
    seed: int,
    trials: int = 1,
    workers: int = 1,
    eta_max: float | None = None,
    jitter_fwhm_ps: float = 0.0,
    dark_rate_per_s: float = 0.0,
) -> list[TimeTagStream]:
    """Independent trials seeded by (seed, trial index), returned in trial order."""
    if trials < 1:
        raise ValidationError(f"Need at least one trial, got {trials}")
    run = partial(
        _run_trial,
        source=source,
        curve=curve,
        duration_ns=duration_ns,
        seed=seed,
        eta_max=eta_max,
        jitter_fwhm_ps=jitter_fwhm_ps,
        dark_rate_per_s=dark_rate_per_s,
    )
    if workers <= 1 or trials == 1:
        return [run(k) for k in range(trials)]
    logger.info("Running simulation trials in parallel", extra={"trials": trials, "workers": workers})
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(trials)))


def sample_irf(fwhm_ps: float, count: int, seed: int, center_ps: float = 0.0) -> np.ndarray:
    """Gaussian timing samples (ps) for an IRF of the given FWHM."""
    if not fwhm_ps > 0 or count < 1:
        raise ValidationError(f"IRF sampling needs fwhm > 0 and count >= 1, got {fwhm_ps}, {count}")
    return trial_rng(seed).normal(center_ps, fwhm_ps / FWHM_PER_SIGMA, count)


def measured_efficiency(stream: TimeTagStream) -> float:
    """Detected signal over emitted photons, from the stream metadata."""
    emitted = stream.meta.get("n_emitted", 0)
    if not emitted:
        return 0.0
    return stream.meta["n_signal"] / emitted
