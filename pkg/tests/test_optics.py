"""Unit tests for dispersion tables, the material catalogue and the meander effective medium."""

import numpy as np
import pytest

from snspd_toolkit.errors import MaterialRangeError, ValidationError
from snspd_toolkit.tools.optics import handle_optics_complexIndex, handle_optics_effectiveIndex
from snspd_toolkit.tools.optics.materials import (
    MaterialCatalog,
    complex_index,
    complex_index_array,
    effective_permittivity,
    ema_permittivity,
    index_from_permittivity,
    load_dispersion_csv,
)
from snspd_toolkit.tools.optics.optics_types import DispersionTable, MeanderGeometry, Polarization


def _ramp() -> DispersionTable:
    return DispersionTable.from_samples("ramp", [(1000, 1.0, 0.0), (2000, 2.0, 0.0)])


def test_constant_table_interpolates_to_constant():
    table = DispersionTable.from_samples("SiO2", [(1000, 1.45, 0.0), (2000, 1.45, 0.0)])
    assert complex_index(table, 1350) == complex(1.45, 0.0)


def test_linear_ramp_midpoint():
    assert complex_index(_ramp(), 1500) == pytest.approx(complex(1.5, 0.0), abs=1e-15)


def test_out_of_range_names_material_and_bounds():
    with pytest.raises(MaterialRangeError) as exc:
        complex_index(_ramp(), 900)
    assert exc.value.material == "ramp"
    assert (exc.value.lo_nm, exc.value.hi_nm) == (1000, 2000)
    assert "ramp" in str(exc.value)


def test_sign_convention_is_n_minus_ik():
    table = DispersionTable.from_samples("lossy", [(1000, 4.0, 5.0), (2000, 4.0, 5.0)])
    assert complex_index(table, 1500) == complex(4.0, -5.0)


def test_sample_points_round_trip_exactly(packaged_catalog):
    table = packaged_catalog.table("Au")
    for wl, n, k in table.samples:
        assert complex_index(table, wl) == complex(n, -k)


def test_array_lookup_matches_scalar(packaged_catalog):
    table = packaged_catalog.table("NbTiN-illustrative")
    wl = np.linspace(1260, 1650, 40)
    values = complex_index_array(table, wl)
    np.testing.assert_array_equal(values, [complex_index(table, w) for w in wl])


@pytest.mark.parametrize(
    "samples",
    [
        [(1000, 1.0, 0.0)],
        [(1000, 1.0, 0.0), (1000, 1.1, 0.0)],
        [(1000, 1.0, 0.0), (900, 1.1, 0.0)],
        [(1000, 0.0, 0.0), (2000, 1.0, 0.0)],
        [(1000, 1.0, -0.1), (2000, 1.0, 0.0)],
    ],
)
def test_invalid_tables_are_rejected(samples):
    with pytest.raises(ValidationError):
        DispersionTable.from_samples("bad", samples)


def test_load_csv_requires_header(tmp_path):
    good = tmp_path / "good.csv"
    good.write_text("# comment\nwavelength_nm,n,k\n1000,1.5,0\n2000,1.6,0.1\n")
    table = load_dispersion_csv(good)
    assert table.material_name == "good"
    assert table.range_nm == (1000.0, 2000.0)

    bad = tmp_path / "bad.csv"
    bad.write_text("1000,1.5,0\n2000,1.6,0.1\n")
    with pytest.raises(ValidationError, match="header"):
        load_dispersion_csv(bad)


def test_packaged_catalogue_covers_laser_window(packaged_catalog):
    for name in ("air", "SiO2", "Au", "NbTiN-illustrative"):
        lo, hi = packaged_catalog.table(name).range_nm
        assert lo <= 1260 and hi >= 1650


def test_unknown_material_is_a_validation_error(packaged_catalog):
    with pytest.raises(ValidationError):
        packaged_catalog.table("unobtainium")


def test_user_materials_file_overrides_entry(isolated_config_dir):
    (isolated_config_dir / "glass.csv").write_text("wavelength_nm,n,k\n1000,1.6,0\n2000,1.6,0\n")
    (isolated_config_dir / "materials.yml").write_text("SiO2:\n  file: glass.csv\n")
    assert MaterialCatalog().index("SiO2", 1500) == complex(1.6, 0.0)


def test_meander_geometry_invariants():
    geom = MeanderGeometry(50, 120, 11, 8)
    assert geom.fill_factor == pytest.approx(50 / 120)
    assert geom.active_area_um2 == pytest.approx(np.pi * 64)
    with pytest.raises(ValidationError):
        MeanderGeometry(120, 120, 11, 8)
    with pytest.raises(ValidationError):
        MeanderGeometry(50, 120, 0, 8)


def test_ema_arithmetic_and_harmonic_means():
    assert ema_permittivity(0.5, 9, 1, Polarization.TE) == pytest.approx(5.0)
    assert ema_permittivity(0.5, 9, 1, Polarization.TM) == pytest.approx(1.8)


def test_ema_rejects_fill_factor_outside_unit_interval():
    for f in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValidationError):
            ema_permittivity(f, 9, 1, Polarization.TE)


@pytest.mark.parametrize("pol", list(Polarization))
def test_ema_full_fill_limit(pol):
    eps_wire = complex(-10.0, -40.0)
    assert ema_permittivity(1 - 1e-12, eps_wire, 1.0, pol) == pytest.approx(eps_wire, rel=1e-9)


def test_tm_never_exceeds_te_for_lossless_media():
    rng = np.random.default_rng(7)
    for _ in range(200):
        f = rng.uniform(0.01, 0.99)
        ew, eg = rng.uniform(1, 25, 2)
        te = ema_permittivity(f, ew, eg, Polarization.TE).real
        tm = ema_permittivity(f, ew, eg, Polarization.TM).real
        assert tm <= te + 1e-12
    assert ema_permittivity(0.3, 4.0, 4.0, Polarization.TM) == ema_permittivity(0.3, 4.0, 4.0, Polarization.TE)


@pytest.mark.parametrize("pol", list(Polarization))
def test_swapping_materials_and_fill_factor_is_symmetric(pol):
    ew, eg = complex(20, -45), complex(2.1, 0)
    assert ema_permittivity(0.3, ew, eg, pol) == pytest.approx(ema_permittivity(0.7, eg, ew, pol), rel=1e-12)


def test_effective_permittivity_uses_geometry_fill_factor():
    geom = MeanderGeometry(60, 120, 11, 8)
    assert effective_permittivity(geom, 9, 1, Polarization.TE) == pytest.approx(5.0)


def test_index_branch_keeps_k_non_negative():
    N = index_from_permittivity(complex(4.0, -5.0) ** 2)
    assert N == pytest.approx(complex(4.0, -5.0))
    assert index_from_permittivity(complex(2.25, 0.0)) == pytest.approx(1.5)


def test_complex_index_handler():
    response = handle_optics_complexIndex("SiO2", 1350)
    assert response["status"] == "success"
    assert response["results"]["n"] == pytest.approx(1.44635)
    assert response["results"]["k"] == 0.0


def test_effective_index_handler_reports_both_polarizations():
    geom = MeanderGeometry(50, 120, 11, 8)
    response = handle_optics_effectiveIndex(geom, "NbTiN-illustrative", "air", 1350)
    results = response["results"]
    assert set(results) == {"TE", "TM"}
    assert results["TE"]["index"]["im"] <= 0
    assert response["metadata"]["fill_factor"] == pytest.approx(50 / 120)
