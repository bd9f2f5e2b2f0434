"""Unit tests for the efficiency-measurement arithmetic."""

import math

import pytest

from snspd_toolkit.errors import RangeError, ValidationError
from snspd_toolkit.tools.metrology import (
    handle_metrology_calibrate,
    handle_metrology_endFace,
    handle_metrology_flux,
    handle_metrology_sde,
    handle_metrology_session,
    handle_metrology_uncertainty,
)
from snspd_toolkit.tools.metrology.measurement import (
    analyze_session,
    calibrate_attenuation,
    chain_from_readings,
    combine_uncertainty,
    compute_sde,
    counts_for_sde,
    fresnel_end_face_reflection,
    normalize_readings,
    photon_flux,
    power_meters,
)
from snspd_toolkit.tools.metrology.metrology_types import (
    PLANCK_J_S,
    SPEED_OF_LIGHT_M_S,
    AttenuationChain,
    PhotonFlux,
    PowerMeter,
)

# 10 nW through 50 dB at 1350 nm
FLUX_10NW_50DB = 6.79606e5


def _session(**extra):
    session = {
        "wavelength_nm": 1350,
        "fiber": {"n_core": 1.45, "n_outside": 1.0},
        "records": [
            {"timestamp": "t0", "P1": 1.0e-3, "P2": 1.0e-8},
            {"timestamp": "t1", "P1": 1.0e-8, "counts_per_s": 6.0e5, "dark_per_s": 100},
            {"timestamp": "t2", "P1": 2.0e-3, "P2": 2.0e-8},
            {"timestamp": "t3", "P1": 1.0e-8, "counts_per_s": 3.0e5, "wavelength_nm": 1550},
        ],
    }
    session.update(extra)
    return session


# ---------------------------------------------------------------------------
# Attenuation and flux
# ---------------------------------------------------------------------------
def test_identical_ratios_calibrate_without_spread():
    ratio_db, spread = calibrate_attenuation([(1e-3, 1e-8), (1.1e-3, 1.1e-8)])
    assert ratio_db == pytest.approx(50.0)
    assert spread == pytest.approx(0.0, abs=1e-12)


def test_calibration_averages_in_db():
    ratio_db, spread = calibrate_attenuation([(1e-3, 1e-8), (1e-3, 0.5e-8)])
    assert ratio_db == pytest.approx((50.0 + 50.0 + 10 * math.log10(2)) / 2)
    assert spread == pytest.approx(1e5 / 1.5e5)


def test_calibration_rejects_bad_readings():
    with pytest.raises(ValidationError):
        calibrate_attenuation([])
    with pytest.raises(ValidationError):
        calibrate_attenuation([(1e-3, 0.0)])


def test_chain_enforces_ratio_band():
    assert AttenuationChain(50.0, (15.0,)).splitter_ratio_db == 50.0
    with pytest.raises(ValidationError, match="outside"):
        AttenuationChain(45.0, (5.0,))
    with pytest.raises(ValidationError, match="outside"):
        AttenuationChain(40.0)
    assert AttenuationChain(40.0, ratio_band_db=None).linear_factor == pytest.approx(1e-4)


def test_chain_from_readings_keeps_readings():
    chain = chain_from_readings([(1e-3, 1e-8)], nd_stages_db=[3.0, 10.0])
    assert chain.splitter_ratio_db == pytest.approx(50.0)
    assert chain.source_nd_db == pytest.approx(13.0)
    assert chain.calibration_readings == ((1e-3, 1e-8),)


def test_photon_flux_oracle():
    flux = photon_flux(1e-8, AttenuationChain(50.0), 1350)
    assert flux.flux_per_s == pytest.approx(FLUX_10NW_50DB, rel=1e-5)
    expected = 1e-13 * 1350e-9 / (PLANCK_J_S * SPEED_OF_LIGHT_M_S)
    assert flux.flux_per_s == pytest.approx(expected, rel=1e-12)
    assert flux.power_at_detector_w == pytest.approx(1e-13)


def test_source_nd_stages_leave_detector_power_alone():
    plain = photon_flux(1e-8, AttenuationChain(50.0), 1350)
    with_nd = photon_flux(1e-8, AttenuationChain(50.0, nd_stages_db=(5.0,)), 1350)
    assert with_nd.flux_per_s == pytest.approx(plain.flux_per_s, rel=1e-12)
    assert with_nd.flux_per_s == pytest.approx(FLUX_10NW_50DB, rel=1e-5)


def test_flux_handler_records_source_nd():
    results = handle_metrology_flux(power_w=1e-8, wavelength_nm=1350, attenuation_db=50, nd_stages_db=[15.0])["results"]
    assert results["flux_per_s"] == pytest.approx(FLUX_10NW_50DB, rel=1e-5)
    assert results["ratio_db"] == 50.0
    assert results["source_nd_db"] == 15.0


def test_photon_flux_scales_with_wavelength():
    chain = AttenuationChain(50.0)
    ratio = photon_flux(1e-8, chain, 1550).flux_per_s / photon_flux(1e-8, chain, 1350).flux_per_s
    assert ratio == pytest.approx(1550 / 1350)


def test_photon_flux_window_and_power_checks():
    chain = AttenuationChain(50.0)
    with pytest.raises(RangeError, match="laser window"):
        photon_flux(1e-8, chain, 1700)
    with pytest.raises(RangeError):
        photon_flux(1e-8, chain, 1259.9)
    assert photon_flux(1e-8, chain, 1700, laser_window_nm=None).flux_per_s > 0
    with pytest.raises(ValidationError):
        photon_flux(0.0, chain, 1350)


def test_flux_from_rate_round_trips_power():
    flux = PhotonFlux.from_rate(1e6, 1550)
    assert PhotonFlux.from_power(flux.power_at_detector_w, 1550).flux_per_s == pytest.approx(1e6)


# ---------------------------------------------------------------------------
# SDE and end-face correction
# ---------------------------------------------------------------------------
def test_fresnel_reflection_of_silica_end_face():
    assert fresnel_end_face_reflection(1.45, 1.0) == pytest.approx(0.033736, abs=1e-6)
    assert fresnel_end_face_reflection(1.5, 1.5) == 0.0
    with pytest.raises(ValidationError):
        fresnel_end_face_reflection(0.0, 1.0)


def test_sde_subtracts_darks_and_corrects_end_face():
    flux = PhotonFlux.from_rate(1e6, 1350)
    result = compute_sde(9e5 + 100, 100, flux, 0.0337)
    assert result.sde == pytest.approx((1 - 0.0337) * 0.9)
    assert not result.over_unity


def test_sde_is_flagged_not_clamped_above_unity():
    result = compute_sde(2e6, 0, PhotonFlux.from_rate(1e6, 1350), 0.0)
    assert result.sde == pytest.approx(2.0)
    assert result.over_unity


def test_sde_rejects_counts_below_darks():
    with pytest.raises(ValidationError):
        compute_sde(50, 100, PhotonFlux.from_rate(1e6, 1350), 0.0)
    with pytest.raises(ValidationError):
        compute_sde(500, 100, PhotonFlux.from_rate(1e6, 1350), 1.0)


def test_counts_for_sde_inverts_compute_sde():
    flux = PhotonFlux.from_rate(FLUX_10NW_50DB, 1350)
    for sde in (0.1, 0.5, 0.94):
        counts = counts_for_sde(sde, 250.0, flux, 0.0337)
        assert compute_sde(counts, 250.0, flux, 0.0337).sde == pytest.approx(sde, rel=1e-12)


def test_absolute_uncertainty_scales_sde():
    result = compute_sde(5e5, 0, PhotonFlux.from_rate(1e6, 1350), 0.0, uncertainty=0.02)
    assert result.absolute_uncertainty == pytest.approx(0.01)


# ---------------------------------------------------------------------------
# Uncertainty budget
# ---------------------------------------------------------------------------
def test_uncertainty_root_sum_square():
    budget = combine_uncertainty([("meter", 0.02), ("linearity", 0.005), ("laser", 0.001), ("attenuator", 0.002)])
    assert budget.total == pytest.approx(math.sqrt(4.3) / 100)
    assert 100 * budget.total == pytest.approx(2.0736, abs=1e-4)


def test_uncertainty_single_and_empty_budget():
    assert combine_uncertainty([("only", 0.03)]).total == pytest.approx(0.03)
    assert combine_uncertainty([]).total == 0.0


def test_uncertainty_is_monotone_in_components():
    base = [("a", 0.01), ("b", 0.02)]
    total = combine_uncertainty(base).total
    assert combine_uncertainty([*base, ("c", 0.001)]).total > total
    assert combine_uncertainty([*base, ("c", 0.0)]).total == pytest.approx(total)
    with pytest.raises(ValidationError):
        combine_uncertainty([("neg", -0.01)])


# ---------------------------------------------------------------------------
# Power meters and sessions
# ---------------------------------------------------------------------------
def test_packaged_power_meters():
    meters = power_meters()
    assert set(meters) == {"reference", "monitor"}
    labels, values = zip(*meters["reference"].uncertainty_components())
    assert labels == ("reference accuracy", "reference linearity")
    assert values == pytest.approx((0.02, 0.005))


def test_power_meter_normalization():
    meter = PowerMeter("monitor", 3.0, 0.5, normalization=1.02)
    assert normalize_readings([1.0, 2.0], meter) == pytest.approx([1.02, 2.04])
    with pytest.raises(ValidationError):
        PowerMeter("bad", 1.0, 0.5, normalization=0.0)


def test_session_analysis():
    result = analyze_session(_session())
    assert result.ratio_db == pytest.approx(50.0)
    assert result.ratio_stable
    assert result.timestamps == ("t1", "t3")
    r_rfl = fresnel_end_face_reflection(1.45, 1.0)
    assert result.results[0].sde == pytest.approx((1 - r_rfl) * 6.0e5 / FLUX_10NW_50DB, rel=1e-5)
    assert result.results[1].flux.wavelength_nm == 1550
    assert result.budget.total == pytest.approx(math.sqrt(4.3) / 100)


def test_session_flags_drifting_ratio():
    session = _session()
    session["records"][2] = {"timestamp": "t2", "P1": 2.2e-3, "P2": 2.0e-8}
    assert not analyze_session(session).ratio_stable


def test_session_requirements():
    with pytest.raises(ValidationError, match="calibration"):
        analyze_session(_session(records=[{"P1": 1e-8, "counts_per_s": 10.0}]))
    session = _session()
    del session["fiber"]
    with pytest.raises(ValidationError, match="r_rfl"):
        analyze_session(session)
    with pytest.raises(ValidationError, match="power meter"):
        analyze_session(_session(meter="bolometer"))
    with pytest.raises(ValidationError, match="malformed"):
        analyze_session(_session(records=[{"P2": 1e-8}]))


def test_config_dir_overrides_ratio_band(isolated_config_dir):
    (isolated_config_dir / "metrology.yml").write_text("ratio_band_db: [40, 70]\n")
    response = handle_metrology_flux(power_w=1e-8, wavelength_nm=1350, attenuation_db=45)
    assert response["results"]["ratio_db"] == 45
    (isolated_config_dir / "metrology.yml").write_text("ratio_band_db: [50, 60]\n")
    with pytest.raises(ValidationError):
        handle_metrology_flux(power_w=1e-8, wavelength_nm=1350, attenuation_db=45)


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------
def test_flux_handler():
    response = handle_metrology_flux(power_w=1e-8, wavelength_nm=1350, attenuation_db=50)
    assert response["results"]["flux_per_s"] == pytest.approx(FLUX_10NW_50DB, rel=1e-5)


def test_flux_handler_with_calibration_readings():
    response = handle_metrology_flux(
        power_w=1e-8, wavelength_nm=1350, calibration_readings=[(1e-3, 1e-8), (2e-3, 2e-8)]
    )
    assert response["results"]["ratio_db"] == pytest.approx(50.0)


def test_calibrate_handler():
    results = handle_metrology_calibrate([(1e-3, 1e-8)])["results"]
    assert results["ratio_db"] == pytest.approx(50.0)
    assert results["readings"] == 1


def test_sde_handler_uses_fresnel_default():
    response = handle_metrology_sde(counts_per_s=6.0e5, wavelength_nm=1350, power_w=1e-8, attenuation_db=50)
    results = response["results"]
    assert results["r_rfl"] == pytest.approx(0.033736, abs=1e-6)
    assert results["sde"] == pytest.approx((1 - results["r_rfl"]) * 6.0e5 / FLUX_10NW_50DB, rel=1e-5)
    assert results["relative_uncertainty"] == pytest.approx(math.sqrt(4.3) / 100)
    assert response["metadata"]["r_rfl_source"].startswith("fresnel")


def test_sde_handler_needs_a_flux():
    with pytest.raises(ValidationError):
        handle_metrology_sde(counts_per_s=10.0, wavelength_nm=1350)


def test_uncertainty_handler_budget_table():
    response = handle_metrology_uncertainty({"power_meter": 0.02, "linearity": 0.005, "laser": 0.001, "att": 0.002})
    assert response["results"]["total_percent"] == pytest.approx(2.0736, abs=1e-4)
    assert response["tables"][0].name == "budget"
    assert len(response["tables"][0].rows) == 4


def test_end_face_handler():
    assert handle_metrology_endFace()["results"]["r_rfl"] == pytest.approx(0.033736, abs=1e-6)


def test_session_handler_reads_file(tmp_path):
    path = tmp_path / "session.yml"
    path.write_text(
        "wavelength_nm: 1350\n"
        "r_rfl: 0.0\n"
        "records:\n"
        "  - {timestamp: cal, P1: 1.0e-3, P2: 1.0e-8}\n"
        "  - {timestamp: m1, P1: 1.0e-8, counts_per_s: 6.79606e5}\n"
    )
    response = handle_metrology_session(str(path))
    assert response["results"]["records"] == 1
    assert response["results"]["sde"][0] == pytest.approx(1.0, rel=1e-5)
    assert response["tables"][0].rows[0][0] == "m1"


def test_session_handler_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        handle_metrology_session(str(tmp_path / "absent.yml"))
