"""Handlers for cavity sweeps, gap optimisation and polarization contrast."""

import logging
from typing import Any

import numpy as np

from snspd_toolkit.tools.cavity.cavity_types import AbsorptionMap, SweepGrid
from snspd_toolkit.tools.cavity.design import (
    DEFAULT_PROMINENCE,
    band_coverage,
    optimize_gap,
    peaks_by_gap,
    polarization_contrast,
    sweep,
    sweep_gap_spacer,
)
from snspd_toolkit.tools.optics.optics_types import Polarization
from snspd_toolkit.tools.tmm.solver import detector_absorption_spectrum
from snspd_toolkit.tools.tmm.stacks import resolve_stack
from snspd_toolkit.tools.utils import Table, create_response, uniform_grid

logger = logging.getLogger("snspd_toolkit")


def _polarization(value: str | None) -> Polarization | None:
    if value is None or str(value).lower() in {"average", "unpolarized"}:
        return None
    return Polarization(value)


def _peak_rows(amap: AbsorptionMap, threshold: float, prefix: tuple = ()) -> tuple[list[tuple], dict[float, int]]:
    rows = []
    counts = {}
    for gap, peakset in peaks_by_gap(amap, threshold):
        counts[gap] = len(peakset)
        rows.extend((*prefix, gap, p.wavelength_nm, p.absorption, p.prominence) for p in peakset)
    return rows, counts


def handle_cavity_sweep(
    stack: Any = None,
    wavelength_start_nm: float = 1260.0,
    wavelength_stop_nm: float = 1650.0,
    wavelength_step_nm: float = 1.0,
    gap_start_nm: float = 0.0,
    gap_stop_nm: float = 10_000.0,
    gap_step_nm: float = 50.0,
    polarization: str | None = "TE",
    prominence: float = DEFAULT_PROMINENCE,
    cutline_gaps_nm: list[float] | None = None,
    band_nm: tuple[float, float] | None = None,
    spacers_nm: list[float] | None = None,
    workers: int = 1,
    overrides: dict[str, Any] | None = None,
) -> dict:
    """Absorption map over airgap × wavelength with per-gap peak analysis.

    Arguments:
      stack           - preset name, stack file path or inline mapping
      polarization    - TE, TM or "average" (unpolarized light)
      prominence      - peak prominence threshold (absolute absorption)
      cutline_gaps_nm - gaps whose spectra are reported separately (must lie on the grid)
      band_nm         - band for the coverage summary of each cutline
      spacers_nm      - optional spacer thicknesses; sweeps the gap × spacer product
    """
    loaded = resolve_stack(stack, overrides)
    grid = SweepGrid(
        wavelengths_nm=uniform_grid(wavelength_start_nm, wavelength_stop_nm, wavelength_step_nm),
        airgaps_nm=uniform_grid(gap_start_nm, gap_stop_nm, gap_step_nm),
        polarization=_polarization(polarization),
    )

    if spacers_nm:
        maps = sweep_gap_spacer(loaded.stack, grid, spacers_nm, loaded.catalog, workers=workers)
    else:
        maps = [(None, sweep(loaded.stack, grid, loaded.catalog, workers=workers))]

    map_rows, peak_rows, summaries = [], [], []
    for spacer, amap in maps:
        prefix = () if spacer is None else (spacer,)
        long_rows = amap.long_rows()
        if spacer is not None:
            long_rows = np.column_stack([np.full(len(long_rows), spacer), long_rows])
        map_rows.append(long_rows)
        rows, counts = _peak_rows(amap, prominence, prefix)
        peak_rows.extend(rows)

        summary: dict[str, Any] = {
            "max_absorption": float(amap.values.max()),
            "single_peak_gaps_nm": [g for g, c in counts.items() if c == 1],
            "multi_peak_gaps_nm": [g for g, c in counts.items() if c >= 2],
        }
        if spacer is not None:
            summary["spacer_nm"] = spacer
        best = np.unravel_index(int(np.argmax(amap.values)), amap.values.shape)
        summary["best_point"] = {
            "gap_nm": float(grid.airgaps_nm[best[0]]),
            "wavelength_nm": float(grid.wavelengths_nm[best[1]]),
            "absorption": float(amap.values[best]),
        }
        cutlines = []
        for gap in cutline_gaps_nm or []:
            curve = amap.cutline(gap)
            entry: dict[str, Any] = {"gap_nm": gap, "peaks": counts[float(amap.grid.airgaps_nm[amap.row_of(gap)])]}
            if band_nm is not None:
                entry["band_coverage"] = band_coverage(grid.wavelengths_nm, curve, tuple(band_nm))
            cutlines.append(entry)
        if cutlines:
            summary["cutlines"] = cutlines
        summaries.append(summary)

    spacer_cols: tuple[str, ...] = ("spacer_nm",) if spacers_nm else ()
    tables = [
        Table("map", (*spacer_cols, "gap_nm", "wavelength_nm", "absorption"), np.vstack(map_rows)),
        Table("peaks", (*spacer_cols, "gap_nm", "wavelength_nm", "absorption", "prominence"), peak_rows),
    ]
    return create_response(
        summaries if spacers_nm else summaries[0],
        metadata={
            "tool_name": "cavity_sweep",
            "stack": loaded.description,
            "grid": {"gaps": grid.shape[0], "wavelengths": grid.shape[1], "polarization": grid.polarization_label},
            "prominence_threshold": prominence,
        },
        tables=tables,
    )


def handle_cavity_optimize(
    targets: list[tuple[float, float]],
    stack: Any = None,
    gap_min_nm: float = 0.0,
    gap_max_nm: float = 10_000.0,
    resolution_nm: float = 5.0,
    tolerance_nm: float = 0.1,
    polarization: str | None = "TE",
    overrides: dict[str, Any] | None = None,
) -> dict:
    """Airgap that maximises the weighted absorption at the target wavelengths."""
    loaded = resolve_stack(stack, overrides)
    pol = _polarization(polarization)
    optimum = optimize_gap(
        loaded.stack,
        targets,
        (gap_min_nm, gap_max_nm),
        loaded.catalog,
        pol=pol,
        resolution_nm=resolution_nm,
        tol_nm=tolerance_nm,
    )
    wl = [float(t[0]) for t in targets]
    at_optimum = detector_absorption_spectrum(loaded.stack.with_gap(optimum.gap_nm), wl, pol, loaded.catalog)
    return create_response(
        {
            "gap_nm": optimum.gap_nm,
            "score": optimum.score,
            "scan_gap_nm": optimum.scan_gap_nm,
            "scan_score": optimum.scan_score,
            "evaluations": optimum.evaluations,
            "absorption_at_targets": [{"wavelength_nm": w, "absorption": a} for w, a in zip(wl, at_optimum)],
        },
        metadata={"tool_name": "cavity_optimize", "stack": loaded.description, "targets": targets},
    )


def handle_cavity_contrast(
    wavelength_nm: float,
    gap_nm: float,
    stack: Any = None,
    overrides: dict[str, Any] | None = None,
) -> dict:
    """Polarization contrast A_TE / A_TM of the meander."""
    loaded = resolve_stack(stack, overrides)
    ratio = polarization_contrast(loaded.stack, wavelength_nm, gap_nm, loaded.catalog)
    return create_response(
        {"wavelength_nm": wavelength_nm, "gap_nm": gap_nm, "contrast_te_over_tm": ratio},
        metadata={"tool_name": "cavity_contrast", "stack": loaded.description},
    )
