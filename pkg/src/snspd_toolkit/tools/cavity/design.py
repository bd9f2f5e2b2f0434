"""Cavity sweeps, peak finding and airgap optimisation."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import signal

from snspd_toolkit.errors import ContractError, MaterialRangeError, NumericError, ValidationError
from snspd_toolkit.tools.cavity.cavity_types import AbsorptionMap, BandCoverage, GapOptimum, Peak, PeakSet, SweepGrid
from snspd_toolkit.tools.optics.materials import MaterialCatalog
from snspd_toolkit.tools.optics.optics_types import Polarization
from snspd_toolkit.tools.tmm.solver import detector_absorption, detector_absorption_spectrum
from snspd_toolkit.tools.tmm.tmm_types import LayerStack

logger = logging.getLogger("snspd_toolkit")

DEFAULT_PROMINENCE = 0.02
DEFAULT_SCAN_RESOLUTION_NM = 5.0
DEFAULT_REFINE_TOLERANCE_NM = 0.1

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
def _sweep_row(
    stack: LayerStack, grid: SweepGrid, row: int, catalog: MaterialCatalog
) -> np.ndarray:
    gap = float(grid.airgaps_nm[row])
    try:
        return detector_absorption_spectrum(stack.with_gap(gap), grid.wavelengths_nm, grid.polarization, catalog)
    except MaterialRangeError as e:
        column = int(np.argmin(np.abs(grid.wavelengths_nm - e.wavelength_nm)))
        raise MaterialRangeError(
            e.material, e.wavelength_nm, e.lo_nm, e.hi_nm, context=f"grid row {row} (gap {gap:g} nm), column {column}"
        ) from e


def sweep(
    stack: LayerStack,
    grid: SweepGrid,
    catalog: MaterialCatalog | None = None,
    workers: int = 1,
) -> AbsorptionMap:
    """Detector absorption over an airgap × wavelength grid.

    Rows are independent; with ``workers > 1`` they run on a thread pool and are
    assembled by row index, so the result does not depend on the worker count.
    """
    catalog = catalog or MaterialCatalog()
    if stack.meander_index is None:
        raise ContractError(f"Stack '{stack.name or 'unnamed'}' has no meander layer to sweep")
    rows = range(grid.airgaps_nm.size)
    if workers > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda i: _sweep_row(stack, grid, i, catalog), rows))
    else:
        values = [_sweep_row(stack, grid, i, catalog) for i in rows]
    logger.info(
        "Sweep finished",
        extra={"stack": stack.name, "gaps": grid.shape[0], "wavelengths": grid.shape[1], "workers": workers},
    )
    return AbsorptionMap(grid=grid, values=np.vstack(values))


def sweep_gap_spacer(
    stack: LayerStack,
    grid: SweepGrid,
    spacers_nm: Sequence[float],
    catalog: MaterialCatalog | None = None,
    spacer_label: str = "spacer",
    workers: int = 1,
) -> list[tuple[float, AbsorptionMap]]:
    """Grid product of airgap and spacer thickness: one absorption map per spacer."""
    if not spacers_nm:
        raise ContractError("Spacer thickness list is empty")
    return [
        (float(d), sweep(stack.with_thickness(spacer_label, float(d)), grid, catalog, workers=workers))
        for d in spacers_nm
    ]


# ---------------------------------------------------------------------------
# Peaks and band coverage
# ---------------------------------------------------------------------------
def find_peaks(wavelengths_nm, absorption, prominence_threshold: float = DEFAULT_PROMINENCE) -> PeakSet:
    """Local maxima of an absorption curve with prominence at or above the threshold.

    A flat-topped maximum is reported at its shortest wavelength.
    """
    wl = np.asarray(wavelengths_nm, dtype=float)
    curve = np.asarray(absorption, dtype=float)
    if wl.shape != curve.shape or wl.ndim != 1:
        raise ContractError("Wavelengths and absorption must be 1-D arrays of equal length")
    if curve.size < 3:
        raise ContractError(f"Peak finding needs at least 3 points, got {curve.size}")
    if prominence_threshold < 0:
        raise ValidationError(f"Prominence threshold must be >= 0, got {prominence_threshold}")

    idx, props = signal.find_peaks(curve, prominence=prominence_threshold, plateau_size=1)
    peaks = []
    for left, prominence in zip(props["left_edges"], props["prominences"]):
        if prominence <= 0:
            continue
        peaks.append(Peak(float(wl[left]), float(curve[left]), float(prominence)))
    peaks.sort(key=lambda p: p.wavelength_nm)
    return PeakSet(peaks=tuple(peaks), threshold=float(prominence_threshold))


def peaks_by_gap(amap: AbsorptionMap, prominence_threshold: float = DEFAULT_PROMINENCE) -> list[tuple[float, PeakSet]]:
    """Peak set of every row of an absorption map."""
    wl = amap.grid.wavelengths_nm
    return [
        (float(gap), find_peaks(wl, amap.values[i], prominence_threshold))
        for i, gap in enumerate(amap.grid.airgaps_nm)
    ]


def band_coverage(wavelengths_nm, absorption, band_nm: tuple[float, float]) -> BandCoverage:
    """Minimum and mean absorption of a curve inside a wavelength band."""
    wl = np.asarray(wavelengths_nm, dtype=float)
    curve = np.asarray(absorption, dtype=float)
    lo, hi = band_nm
    if lo > hi:
        raise ValidationError(f"Band [{lo}, {hi}] nm is reversed")
    inside = (wl >= lo) & (wl <= hi)
    if not np.any(inside):
        raise ContractError(f"No grid wavelength falls inside the band [{lo}, {hi}] nm")
    sub = curve[inside]
    k = int(np.argmin(sub))
    return BandCoverage(
        band_nm=(float(lo), float(hi)),
        min_absorption=float(sub[k]),
        wavelength_of_min_nm=float(wl[inside][k]),
        mean_absorption=float(np.mean(sub)),
        points=int(sub.size),
    )


# ---------------------------------------------------------------------------
# Optimisation
# ---------------------------------------------------------------------------
def _golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float, int]:
    """Golden-section search for a maximum of f on [a, b]; returns (x, f(x), evaluations)."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 1

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    evaluations = 2

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)
        evaluations += 1

    return (c, yc, evaluations) if yc > yd else (d, yd, evaluations)


def maximize_1d(
    score: Callable[[float], float],
    lo: float,
    hi: float,
    resolution: float = DEFAULT_SCAN_RESOLUTION_NM,
    tol: float = DEFAULT_REFINE_TOLERANCE_NM,
) -> GapOptimum:
    """Dense scan at ``resolution`` then golden-section refinement around the best scan point.

    The result is never worse than the best scanned point.
    """
    if lo > hi:
        raise ValidationError(f"Bounds are reversed: lo={lo} > hi={hi}")
    if resolution <= 0 or tol <= 0:
        raise ValidationError("Scan resolution and refinement tolerance must be > 0")
    if lo == hi:
        value = float(score(lo))
        return GapOptimum(gap_nm=float(lo), score=value, scan_gap_nm=float(lo), scan_score=value, evaluations=1)

    count = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    xs = lo + resolution * np.arange(count)
    if xs[-1] < hi:
        xs = np.append(xs, hi)
    values = np.array([float(score(float(x))) for x in xs])
    if not np.all(np.isfinite(values)):
        raise NumericError("Objective returned non-finite values during the scan")
    k = int(np.argmax(values))  # first maximum on ties
    scan_x, scan_best = float(xs[k]), float(values[k])

    left = float(xs[max(k - 1, 0)])
    right = float(xs[min(k + 1, xs.size - 1)])
    x_ref, y_ref, n_ref = _golden_section_max(lambda x: float(score(x)), left, right, tol)

    if y_ref > scan_best:
        best_x, best_y = float(x_ref), float(y_ref)
    else:
        best_x, best_y = scan_x, scan_best
    return GapOptimum(
        gap_nm=best_x, score=best_y, scan_gap_nm=scan_x, scan_score=scan_best, evaluations=int(xs.size) + n_ref
    )


def optimize_gap(
    stack: LayerStack,
    targets: Sequence[tuple[float, float]],
    bounds_nm: tuple[float, float] = (0.0, 10_000.0),
    catalog: MaterialCatalog | None = None,
    pol: Polarization | None = Polarization.TE,
    resolution_nm: float = DEFAULT_SCAN_RESOLUTION_NM,
    tol_nm: float = DEFAULT_REFINE_TOLERANCE_NM,
) -> GapOptimum:
    """Airgap maximising Σ weightᵢ · absorption(λᵢ, gap)."""
    if not targets:
        raise ContractError("optimize_gap needs at least one (wavelength, weight) target")
    wl = np.array([float(t[0]) for t in targets])
    weights = np.array([float(t[1]) for t in targets])
    if np.any(weights <= 0):
        raise ValidationError(f"Target weights must be > 0, got {weights.tolist()}")
    lo, hi = (float(b) for b in bounds_nm)
    if lo < 0:
        raise ValidationError(f"Gap bounds must be >= 0 nm, got lo={lo}")
    catalog = catalog or MaterialCatalog()

    def score(gap: float) -> float:
        return float(np.dot(weights, detector_absorption_spectrum(stack.with_gap(gap), wl, pol, catalog)))

    optimum = maximize_1d(score, lo, hi, resolution_nm, tol_nm)
    logger.info(
        "Gap optimised",
        extra={"gap_nm": optimum.gap_nm, "score": optimum.score, "evaluations": optimum.evaluations},
    )
    return optimum


def polarization_contrast(
    stack: LayerStack, wavelength_nm: float, gap_nm: float, catalog: MaterialCatalog | None = None
) -> float:
    """A_TE / A_TM of the meander at one wavelength and airgap."""
    catalog = catalog or MaterialCatalog()
    at_gap = stack.with_gap(gap_nm)
    a_te = detector_absorption(at_gap, wavelength_nm, Polarization.TE, catalog)
    a_tm = detector_absorption(at_gap, wavelength_nm, Polarization.TM, catalog)
    if a_tm == 0:
        raise NumericError(f"TM absorption is zero at {wavelength_nm} nm, gap {gap_nm} nm; contrast undefined")
    return a_te / a_tm
