"""Unit tests for cavity sweeps, peak analysis and airgap optimisation."""

import math

import numpy as np
import pytest

from snspd_toolkit.errors import ContractError, NumericError, ValidationError
from snspd_toolkit.tools.cavity import design, handle_cavity_contrast, handle_cavity_optimize, handle_cavity_sweep
from snspd_toolkit.tools.cavity.cavity_types import AbsorptionMap, SweepGrid
from snspd_toolkit.tools.cavity.design import (
    band_coverage,
    find_peaks,
    maximize_1d,
    optimize_gap,
    peaks_by_gap,
    polarization_contrast,
    sweep,
    sweep_gap_spacer,
)
from snspd_toolkit.tools.optics.optics_types import Polarization
from snspd_toolkit.tools.tmm.solver import detector_absorption, detector_absorption_spectrum
from snspd_toolkit.tools.tmm.stacks import CANONICAL_STACK, named_stack, resolve_stack
from snspd_toolkit.tools.tmm.tmm_types import HomogeneousLayer, LayerStack

WL = np.arange(1260.0, 1651.0, 1.0)


@pytest.fixture
def canonical():
    loaded = resolve_stack(CANONICAL_STACK)
    return loaded.stack, loaded.catalog


def _gaussian(center: float, width: float, height: float = 0.9) -> np.ndarray:
    return height * np.exp(-((WL - center) ** 2) / (2 * width**2))


# ---------------------------------------------------------------------------
# Peak finding
# ---------------------------------------------------------------------------
def test_monotone_curve_has_no_peaks():
    assert len(find_peaks(WL, np.linspace(0.1, 0.9, WL.size))) == 0


def test_flat_curve_has_no_peaks():
    assert len(find_peaks(WL, np.full(WL.size, 0.5), 0.0)) == 0


def test_double_gaussian_peaks_are_found():
    curve = _gaussian(1280, 15) + _gaussian(1500, 20)
    peaks = find_peaks(WL, curve)
    assert len(peaks) == 2
    assert peaks.wavelengths_nm[0] == pytest.approx(1280, abs=1.0)
    assert peaks.wavelengths_nm[1] == pytest.approx(1500, abs=1.0)
    assert all(p.prominence >= 0.02 for p in peaks)


def test_prominence_threshold_drops_ripples():
    curve = _gaussian(1450, 40) + 0.005 * np.sin(WL / 3.0)
    assert len(find_peaks(WL, curve, 0.02)) == 1


def test_plateau_reports_shortest_wavelength():
    peaks = find_peaks([1, 2, 3, 4, 5], [0.0, 1.0, 1.0, 1.0, 0.0], 0.1)
    assert peaks.wavelengths_nm == [2.0]


def test_peaks_are_invariant_under_vertical_scaling():
    curve = _gaussian(1300, 10, 0.4) + _gaussian(1420, 25, 0.6) + _gaussian(1600, 12, 0.3)
    base = find_peaks(WL, curve, 0.02)
    scaled = find_peaks(WL, 2.5 * curve, 0.05)
    assert scaled.wavelengths_nm == base.wavelengths_nm


def test_find_peaks_contract():
    with pytest.raises(ContractError):
        find_peaks([1, 2], [0.1, 0.2])
    with pytest.raises(ValidationError):
        find_peaks(WL, _gaussian(1400, 10), -0.1)


# ---------------------------------------------------------------------------
# Band coverage
# ---------------------------------------------------------------------------
def test_band_coverage_reports_worst_point():
    curve = _gaussian(1280, 30) + _gaussian(1500, 30)
    coverage = band_coverage(WL, curve, (1280, 1500))
    mid = int(np.argmin(curve[(WL >= 1280) & (WL <= 1500)]))
    assert coverage.points == 221
    assert coverage.wavelength_of_min_nm == 1280 + mid
    assert coverage.min_absorption < coverage.mean_absorption
    assert not coverage.meets(0.5)


def test_band_coverage_errors():
    with pytest.raises(ValidationError):
        band_coverage(WL, WL * 0, (1500, 1400))
    with pytest.raises(ContractError):
        band_coverage(WL, WL * 0, (100, 200))


# ---------------------------------------------------------------------------
# 1-D maximisation
# ---------------------------------------------------------------------------
def test_maximize_1d_finds_cosine_maximum():
    optimum = maximize_1d(lambda x: math.cos(2 * math.pi * (x - 437.3) / 1000), 0, 1000, resolution=5, tol=0.1)
    assert optimum.gap_nm == pytest.approx(437.3, abs=0.1)
    assert optimum.score >= optimum.scan_score


def test_maximize_1d_never_worse_than_scan():
    rng = np.random.default_rng(3)
    for _ in range(20):
        centers = rng.uniform(0, 500, 4)
        heights = rng.uniform(0.2, 1.0, 4)

        def score(x, c=centers, h=heights):
            return float(np.sum(h * np.exp(-((x - c) ** 2) / 50.0)))

        optimum = maximize_1d(score, 0, 500, resolution=5, tol=0.1)
        scan = max(score(x) for x in np.arange(0, 501, 5.0))
        assert optimum.score >= scan - 1e-15


def test_maximize_1d_degenerate_and_reversed_bounds():
    optimum = maximize_1d(lambda x: 2.0 * x, 7.0, 7.0)
    assert (optimum.gap_nm, optimum.score, optimum.evaluations) == (7.0, 14.0, 1)
    with pytest.raises(ValidationError):
        maximize_1d(lambda x: x, 5.0, 1.0)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------
def test_single_point_sweep_matches_solver(canonical):
    stack, catalog = canonical
    grid = SweepGrid([1350.0], [2000.0], Polarization.TE)
    amap = sweep(stack, grid, catalog)
    assert amap.values.shape == (1, 1)
    assert amap.values[0, 0] == pytest.approx(detector_absorption(stack, 1350, Polarization.TE, catalog), abs=1e-15)


def test_sweep_does_not_depend_on_worker_count(canonical):
    stack, catalog = canonical
    grid = SweepGrid(np.arange(1260.0, 1651.0, 15.0), np.arange(0.0, 3001.0, 250.0), Polarization.TE)
    serial = sweep(stack, grid, catalog, workers=1)
    threaded = sweep(stack, grid, catalog, workers=4)
    np.testing.assert_array_equal(serial.values, threaded.values)


def test_unpolarized_sweep_averages_polarizations(canonical):
    stack, catalog = canonical
    wl = [1300.0, 1400.0]
    amap = sweep(stack, SweepGrid(wl, [1500.0], None), catalog)
    te = detector_absorption_spectrum(stack.with_gap(1500), wl, Polarization.TE, catalog)
    tm = detector_absorption_spectrum(stack.with_gap(1500), wl, Polarization.TM, catalog)
    np.testing.assert_allclose(amap.values[0], 0.5 * (te + tm))


def test_sweep_needs_a_meander(toy_catalog):
    stack = LayerStack("air", (HomogeneousLayer("air", 100.0, tunable=True),), "glass")
    with pytest.raises(ContractError):
        sweep(stack, SweepGrid([1300.0, 1400.0], [0.0, 10.0]), toy_catalog)


def test_sweep_grid_validation():
    with pytest.raises(ValidationError):
        SweepGrid([1300.0, 1300.0], [0.0])
    with pytest.raises(ValidationError):
        SweepGrid([1300.0], [-5.0])


def test_cutline_requires_gap_on_grid(canonical):
    stack, catalog = canonical
    amap = sweep(stack, SweepGrid([1300.0, 1350.0, 1400.0], [0.0, 100.0]), catalog)
    assert amap.cutline(100.0).shape == (3,)
    with pytest.raises(ContractError):
        amap.cutline(50.0)


def test_gap_spacer_product_yields_one_map_per_spacer(canonical):
    stack, catalog = canonical
    grid = SweepGrid([1300.0, 1350.0, 1400.0], [0.0, 500.0])
    maps = sweep_gap_spacer(stack, grid, [200.0, 230.0], catalog)
    assert [spacer for spacer, _ in maps] == [200.0, 230.0]
    reference = sweep(stack, grid, catalog)
    np.testing.assert_array_equal(maps[1][1].values, reference.values)
    with pytest.raises(ContractError):
        sweep_gap_spacer(stack, grid, [], catalog)


@pytest.mark.slow
def test_gap_sweep_shows_single_and_dual_peak_regimes(canonical):
    stack, catalog = canonical
    grid = SweepGrid(np.arange(1260.0, 1651.0, 2.0), np.arange(0.0, 10_001.0, 50.0), Polarization.TE)
    amap = sweep(stack, grid, catalog, workers=4)
    counts = [len(peaks) for _, peaks in peaks_by_gap(amap, 0.02)]
    assert 1 in counts
    assert any(c >= 2 for c in counts)

    # λ/2 periodicity of the airgap at fixed wavelength
    for wl in (1280.0, 1350.0, 1500.0):
        for gap in (500.0, 3000.0, 7000.0):
            a = detector_absorption(stack.with_gap(gap), wl, Polarization.TE, catalog)
            b = detector_absorption(stack.with_gap(gap + wl / 2), wl, Polarization.TE, catalog)
            assert b == pytest.approx(a, rel=1e-6)


def test_absorption_map_validation():
    grid = SweepGrid([1300.0, 1400.0], [0.0])
    with pytest.raises(ValidationError):
        AbsorptionMap(grid, [[0.5]])
    with pytest.raises(ValidationError):
        AbsorptionMap(grid, [[0.5, 1.5]])
    rows = AbsorptionMap(grid, [[0.25, 0.75]]).long_rows()
    np.testing.assert_array_equal(rows, [[0.0, 1300.0, 0.25], [0.0, 1400.0, 0.75]])


# ---------------------------------------------------------------------------
# Gap optimisation and polarization contrast
# ---------------------------------------------------------------------------
def test_optimize_gap_beats_coarse_scan(canonical):
    stack, catalog = canonical
    optimum = optimize_gap(stack, [(1350.0, 1.0)], (0.0, 1000.0), catalog)
    coarse = [detector_absorption(stack.with_gap(g), 1350, Polarization.TE, catalog) for g in np.arange(0, 1001, 25.0)]
    assert optimum.score >= max(coarse) - 1e-12
    assert optimum.score == pytest.approx(
        detector_absorption(stack.with_gap(optimum.gap_nm), 1350, Polarization.TE, catalog), abs=1e-12
    )


def test_optimize_gap_matches_fine_brute_force(canonical):
    stack, catalog = canonical
    # narrower than one λ/2 gap period, so the maximum is unique
    gaps = np.arange(0.0, 600.05, 0.1)
    brute = np.array([detector_absorption(stack.with_gap(g), 1350, Polarization.TE, catalog) for g in gaps])
    optimum = optimize_gap(stack, [(1350.0, 1.0)], (0.0, 600.0), catalog)
    assert optimum.score >= brute.max() - 1e-6
    assert optimum.gap_nm == pytest.approx(gaps[np.argmax(brute)], abs=0.2)


def test_optimize_gap_argument_errors(canonical):
    stack, catalog = canonical
    with pytest.raises(ContractError):
        optimize_gap(stack, [], (0.0, 100.0), catalog)
    with pytest.raises(ValidationError):
        optimize_gap(stack, [(1350.0, 0.0)], (0.0, 100.0), catalog)
    with pytest.raises(ValidationError):
        optimize_gap(stack, [(1350.0, 1.0)], (100.0, 0.0), catalog)


def test_contrast_is_one_for_identical_materials():
    stack = named_stack(meander_gap_material="NbTiN-illustrative")
    assert polarization_contrast(stack, 1350, 2000) == 1.0


def test_wire_grid_favours_parallel_polarization(canonical):
    stack, catalog = canonical
    assert polarization_contrast(stack, 1350, 2000, catalog) > 1.0


def test_contrast_with_zero_tm_absorption(canonical, monkeypatch):
    stack, catalog = canonical
    monkeypatch.setattr(design, "detector_absorption", lambda s, wl, pol, cat: 0.4 if pol is Polarization.TE else 0.0)
    with pytest.raises(NumericError):
        polarization_contrast(stack, 1350, 2000, catalog)


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------
def test_sweep_handler_summary_and_tables():
    response = handle_cavity_sweep(
        wavelength_step_nm=10,
        gap_start_nm=0,
        gap_stop_nm=2000,
        gap_step_nm=500,
        cutline_gaps_nm=[1000],
        band_nm=(1300, 1400),
    )
    results = response["results"]
    assert 0 < results["max_absorption"] <= 1
    assert results["cutlines"][0]["gap_nm"] == 1000
    assert "min_absorption" in results["cutlines"][0]["band_coverage"]
    tables = {t.name: t for t in response["tables"]}
    assert tables["map"].columns == ("gap_nm", "wavelength_nm", "absorption")
    assert tables["map"].rows.shape == (5 * 40, 3)
    assert tables["peaks"].columns == ("gap_nm", "wavelength_nm", "absorption", "prominence")


def test_sweep_handler_with_spacers_adds_column():
    response = handle_cavity_sweep(
        wavelength_step_nm=30, gap_start_nm=0, gap_stop_nm=500, gap_step_nm=250, spacers_nm=[200, 230]
    )
    assert [summary["spacer_nm"] for summary in response["results"]] == [200, 230]
    assert response["tables"][0].columns[0] == "spacer_nm"


def test_optimize_handler_reports_target_absorption():
    response = handle_cavity_optimize(targets=[(1280, 1.0), (1500, 1.0)], gap_max_nm=2000)
    results = response["results"]
    assert results["score"] == pytest.approx(sum(t["absorption"] for t in results["absorption_at_targets"]))


def test_contrast_handler():
    response = handle_cavity_contrast(wavelength_nm=1350, gap_nm=2000)
    assert response["results"]["contrast_te_over_tm"] > 1.0
