"""Handlers for the time-tag lab: simulate streams, auto-correlate, fit the IRF."""

import logging
from pathlib import Path
from typing import Any

from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.dynamics.dynamics_tools import resolve_curve
from snspd_toolkit.tools.timetag.analysis import (
    DEFAULT_AUTOCORR_BIN_NS,
    DEFAULT_IRF_BIN_PS,
    autocorrelation_histogram,
    fit_gaussian_irf,
    irf_histogram,
    recovery_from_autocorrelation,
)
from snspd_toolkit.tools.timetag.simulation import (
    measured_efficiency,
    sample_irf,
    simulate_stream,
    simulate_trials,
)
from snspd_toolkit.tools.timetag.tagfile import HISTOGRAM_COLUMNS, read_histogram_csv, read_tag_file, write_tag_file
from snspd_toolkit.tools.timetag.timetag_types import TimeTagStream, source_from_mapping
from snspd_toolkit.tools.utils import Table, create_response

logger = logging.getLogger("snspd_toolkit")


def _trial_summary(stream: TimeTagStream) -> dict[str, Any]:
    meta = stream.meta
    return {
        "trial": meta.get("trial", 0),
        "n_emitted": meta.get("n_emitted", 0),
        "n_signal": meta.get("n_signal", 0),
        "n_dark": meta.get("n_dark", 0),
        "n_tags": len(stream),
        "measured_efficiency": measured_efficiency(stream),
        "count_rate_per_s": stream.count_rate_per_s,
    }


def _stream_from_spec(spec: dict[str, Any]) -> TimeTagStream:
    """Simulate a single stream from an inline ``simulate`` mapping."""
    spec = dict(spec)
    if "seed" not in spec:
        raise ValidationError("An inline simulation needs a seed")
    curve = resolve_curve(spec.pop("preset", None), spec.pop("curve", None))
    source = source_from_mapping(spec.pop("source", {}))
    return simulate_stream(source, curve, **spec)


#------------------ Tool Handler Functions ------------------#


def handle_timetag_simulate(
    source: dict[str, Any],
    duration_ns: float,
    seed: int,
    preset: str | None = None,
    curve: dict[str, Any] | None = None,
    eta_max: float | None = None,
    jitter_fwhm_ps: float = 0.0,
    dark_rate_per_s: float = 0.0,
    trials: int = 1,
    workers: int = 1,
    output_dir: Path | None = None,
) -> dict:
    """Simulate detected time tags; with ``output_dir`` each trial is also written as a tag file."""
    rc = resolve_curve(preset, curve)
    model = source_from_mapping(source)
    streams = simulate_trials(
        model,
        rc,
        duration_ns,
        seed,
        trials=trials,
        workers=workers,
        eta_max=eta_max,
        jitter_fwhm_ps=jitter_fwhm_ps,
        dark_rate_per_s=dark_rate_per_s,
    )
    files = []
    if output_dir is not None:
        for stream in streams:
            files.append(write_tag_file(Path(output_dir) / f"tags_trial{stream.meta['trial']}.txt", stream))

    summaries = [_trial_summary(s) for s in streams]
    emitted = sum(s["n_emitted"] for s in summaries)
    signal = sum(s["n_signal"] for s in summaries)
    columns = tuple(summaries[0])
    return create_response(
        {
            "trials": summaries,
            "n_emitted": emitted,
            "n_signal": signal,
            "measured_efficiency": signal / emitted if emitted else 0.0,
            "tag_files": files,
        },
        metadata={
            "tool_name": "timetag_simulate",
            "source": model.describe(),
            "recovery": rc.name,
            "eta_max": rc.eta_max if eta_max is None else eta_max,
            "seed": seed,
            "units": {"time": "ns", "jitter": "ps", "rates": "1/s"},
        },
        tables=[Table("trials", columns, [[s[c] for c in columns] for s in summaries])],
    )


def handle_timetag_autocorr(
    tag_file: str | None = None,
    simulate: dict[str, Any] | None = None,
    bin_width_ns: float = DEFAULT_AUTOCORR_BIN_NS,
    max_delay_ns: float = 200.0,
    plateau_start_ns: float | None = None,
) -> dict:
    """Consecutive-delay histogram of a tag file (or an inline simulation) and its recovery estimate."""
    if (tag_file is None) == (simulate is None):
        raise ValidationError("Give exactly one of 'tag_file' or 'simulate'")
    stream = read_tag_file(Path(tag_file)) if tag_file is not None else _stream_from_spec(simulate or {})
    hist = autocorrelation_histogram(stream, bin_width_ns, max_delay_ns)
    estimate = recovery_from_autocorrelation(hist, plateau_start_ns)
    return create_response(
        {
            "events": len(stream),
            "binned": hist.total,
            "discarded": hist.discarded,
            "recovery": estimate,
        },
        metadata={"tool_name": "timetag_autocorr", "stream": stream.meta, "units": {"delay": "ns"}},
        tables=[Table("autocorr", HISTOGRAM_COLUMNS, hist.rows())],
    )


def handle_timetag_fitIrf(
    histogram_file: str | None = None,
    samples: dict[str, Any] | None = None,
    bin_width_ps: float = DEFAULT_IRF_BIN_PS,
    sigma_floor_ps: float | None = None,
) -> dict:
    """Gaussian fit of an IRF histogram, read from CSV or built from seeded samples.

    ``samples`` takes ``fwhm_ps``, ``count``, ``seed`` and optionally ``center_ps``.
    """
    if (histogram_file is None) == (samples is None):
        raise ValidationError("Give exactly one of 'histogram_file' or 'samples'")
    if histogram_file is not None:
        hist = read_histogram_csv(Path(histogram_file), unit="ps")
    else:
        spec = dict(samples or {})
        try:
            draws = sample_irf(
                float(spec["fwhm_ps"]), int(spec["count"]), int(spec["seed"]), float(spec.get("center_ps", 0.0))
            )
        except KeyError as e:
            raise ValidationError(f"IRF samples need {e.args[0]!r}") from e
        hist = irf_histogram(draws, bin_width_ps)
    fit = fit_gaussian_irf(hist, sigma_floor_ps)
    logger.info("IRF fit", extra={"fwhm_ps": fit.fwhm, "fwhm_std_error_ps": fit.fwhm_std_error})
    return create_response(
        fit,
        metadata={
            "tool_name": "timetag_fitIrf",
            "bins": int(hist.counts.size),
            "samples": hist.total,
            "bin_width_ps": hist.bin_width,
            "units": {"time": "ps"},
        },
        tables=[Table("irf", HISTOGRAM_COLUMNS, hist.rows())],
    )
