"""Auto-correlation and IRF analyses of time-tag data."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import optimize, stats

from snspd_toolkit.errors import FitError, InsufficientDataError, ValidationError
from snspd_toolkit.tools.timetag.timetag_types import (
    FWHM_PER_SIGMA,
    GaussianFit,
    Histogram,
    KsResult,
    RecoveryEstimate,
    TimeTagStream,
)

logger = logging.getLogger("snspd_toolkit")

DEFAULT_AUTOCORR_BIN_NS = 1.0
DEFAULT_IRF_BIN_PS = 1.0
MAX_FIT_EVALUATIONS = 200
DEFAULT_SIGMA_FLOOR_BINS = 0.25
MIN_FIT_BINS = 5


# ---------------------------------------------------------------------------
# Auto-correlation
# ---------------------------------------------------------------------------
def autocorrelation_histogram(
    stream: TimeTagStream,
    bin_width_ns: float = DEFAULT_AUTOCORR_BIN_NS,
    max_delay_ns: float = 200.0,
) -> Histogram:
    """Histogram of delays between consecutive events; longer delays are counted as discarded."""
    if len(stream) < 2:
        raise InsufficientDataError(f"Auto-correlation needs at least 2 time tags, got {len(stream)}")
    if not bin_width_ns > 0 or not max_delay_ns >= bin_width_ns:
        raise ValidationError(f"Need 0 < bin_width <= max_delay, got {bin_width_ns}, {max_delay_ns}")
    # last bin reaches max_delay; the slack absorbs float noise in exact multiples
    n_bins = math.ceil(max_delay_ns / bin_width_ns - 1e-9)
    edges = np.linspace(0.0, n_bins * bin_width_ns, n_bins + 1)
    delays = np.diff(stream.tags)
    kept = delays[delays <= edges[-1]]
    counts, _ = np.histogram(kept, bins=edges)
    return Histogram(bin_edges=edges, counts=counts, discarded=int(delays.size - kept.size), unit="ns")


def recovery_from_autocorrelation(
    hist: Histogram,
    plateau_start_ns: float | None = None,
    fit_half_window: int = 5,
) -> RecoveryEstimate:
    """First populated delay and the delay where counts reach half the extrapolated plateau.

    Beyond full recovery the delay density decays exponentially; a log-linear
    fit to that region is extrapolated back and the half crossing is located
    by a local linear fit of counts/plateau.
    """
    counts = hist.counts.astype(float)
    centers = hist.bin_centers
    populated = np.flatnonzero(counts)
    if populated.size < 2:
        raise InsufficientDataError("Auto-correlation histogram has fewer than 2 populated bins")
    t_blind = float(hist.bin_edges[populated[0]])

    if plateau_start_ns is None:
        plateau_start_ns = float(hist.bin_edges[0] + 0.6 * (hist.bin_edges[-1] - hist.bin_edges[0]))
    plateau = (centers >= plateau_start_ns) & (counts > 0)
    if np.count_nonzero(plateau) < 3:
        raise InsufficientDataError(f"Fewer than 3 populated bins beyond the plateau start {plateau_start_ns} ns")
    slope, intercept = np.polyfit(centers[plateau], np.log(counts[plateau]), 1, w=np.sqrt(counts[plateau]))
    ratio = counts / np.exp(intercept + slope * centers)

    above = np.flatnonzero((ratio >= 0.5) & (centers >= t_blind))
    if above.size == 0:
        raise InsufficientDataError("Histogram never reaches half of the plateau level")
    i = int(above[0])
    window = slice(max(i - fit_half_window, populated[0]), min(i + fit_half_window + 1, counts.size))
    a, b = np.polyfit(centers[window], ratio[window], 1)
    half = (0.5 - b) / a if a > 0 else float(centers[i])
    return RecoveryEstimate(
        t_blind_ns=t_blind,
        half_recovery_ns=float(half),
        plateau_decay_per_ns=float(-slope),
        plateau_start_ns=float(plateau_start_ns),
    )


def exponential_ks(hist: Histogram, rate_per_s: float, alpha: float = 0.01) -> KsResult:
    """Kolmogorov–Smirnov distance between binned delays and an exponential law at ``rate_per_s``.

    The exponential CDF is truncated to the histogram range so discarded
    long delays do not bias the comparison.
    """
    if hist.total == 0:
        raise InsufficientDataError("Empty histogram")
    rate = rate_per_s * 1e-9
    edges = hist.bin_edges
    model = -np.expm1(-rate * (edges - edges[0]))
    model /= model[-1]
    empirical = np.concatenate([[0.0], np.cumsum(hist.counts) / hist.total])
    statistic = float(np.max(np.abs(empirical - model)))
    critical = float(stats.kstwo.ppf(1.0 - alpha, hist.total))
    return KsResult(statistic=statistic, critical_value=critical, samples=hist.total, alpha=alpha)


# ---------------------------------------------------------------------------
# IRF
# ---------------------------------------------------------------------------
def irf_histogram(samples_ps: np.ndarray, bin_width_ps: float = DEFAULT_IRF_BIN_PS) -> Histogram:
    """Bins aligned to multiples of ``bin_width_ps`` covering all samples."""
    samples = np.asarray(samples_ps, dtype=float)
    if samples.size == 0:
        raise InsufficientDataError("No IRF samples")
    if not bin_width_ps > 0:
        raise ValidationError(f"Bin width must be > 0 ps, got {bin_width_ps}")
    lo = math.floor(samples.min() / bin_width_ps)
    hi = math.floor(samples.max() / bin_width_ps) + 1
    edges = np.arange(lo, hi + 1) * bin_width_ps
    counts, _ = np.histogram(samples, bins=edges)
    return Histogram(bin_edges=edges, counts=counts, unit="ps")


def _gaussian(x, amplitude, center, sigma):
    return amplitude * np.exp(-0.5 * ((x - center) / sigma) ** 2)


def _gaussian_jacobian(x, amplitude, center, sigma):
    u = (x - center) / sigma
    e = np.exp(-0.5 * u**2)
    return np.column_stack([e, amplitude * e * u / sigma, amplitude * e * u**2 / sigma])


def fit_gaussian_irf(
    hist: Histogram,
    sigma_floor: float | None = None,
    max_evaluations: int = MAX_FIT_EVALUATIONS,
) -> GaussianFit:
    """Levenberg–Marquardt fit of amplitude·exp(−(t−center)²/2σ²) to the bin centres.

    Starts from the histogram moments; works in coordinates centred on the
    first moment. ``sigma_floor`` defaults to a quarter of the bin width.
    """
    y = hist.counts.astype(float)
    if np.count_nonzero(y) < MIN_FIT_BINS:
        raise InsufficientDataError(
            f"Gaussian fit needs at least {MIN_FIT_BINS} nonzero bins, got {np.count_nonzero(y)}"
        )
    floor = DEFAULT_SIGMA_FLOOR_BINS * hist.bin_width if sigma_floor is None else sigma_floor

    x = hist.bin_centers
    origin = float(np.sum(x * y) / np.sum(y))
    xc = x - origin
    sigma0 = math.sqrt(max(float(np.sum(y * xc**2) / np.sum(y)), hist.bin_width**2 / 12.0))
    p0 = [float(y.max()), 0.0, sigma0]

    try:
        popt, pcov, info, _, _ = optimize.curve_fit(
            _gaussian,
            xc,
            y,
            p0=p0,
            jac=_gaussian_jacobian,
            method="lm",
            maxfev=max_evaluations,
            full_output=True,
        )
    except RuntimeError as e:
        residual = float(np.linalg.norm(y - _gaussian(xc, *p0)))
        logger.warning("IRF fit did not converge", extra={"residual_norm": residual, "evaluations": max_evaluations})
        raise FitError("Gaussian IRF fit did not converge", residual, max_evaluations) from e

    amplitude, center, sigma = float(popt[0]), float(popt[1]), abs(float(popt[2]))
    residuals = y - _gaussian(xc, *popt)
    residual_norm = float(np.linalg.norm(residuals))
    iterations = int(info.get("nfev", 0))
    if sigma < floor:
        raise FitError(
            f"Fitted sigma {sigma:.4g} {hist.unit} is below the floor {floor:.4g} {hist.unit}", residual_norm, iterations
        )
    variance = float(pcov[2, 2])
    if not math.isfinite(variance) or variance < 0:
        raise FitError("Gaussian IRF fit covariance is undefined", residual_norm, iterations)

    dof = max(y.size - 3, 1)
    goodness = float(np.sum(residuals**2 / np.maximum(y, 1.0)) / dof)
    return GaussianFit(
        center=center + origin,
        sigma=sigma,
        fwhm=FWHM_PER_SIGMA * sigma,
        amplitude=amplitude,
        fwhm_std_error=FWHM_PER_SIGMA * math.sqrt(variance),
        goodness=goodness,
        iterations=iterations,
        unit=hist.unit,
    )
