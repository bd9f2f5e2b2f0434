"""Command runner for the SNSPD toolkit.

High-level architecture:
- cli.py is a thin entrypoint that parses flags/env into a Settings object and
  calls run_command(command, settings, config_file).
- run_command resolves the command's parameters (profile defaults, then the
  ``--config`` file, then the ``--seed`` flag), validates them with the
  command's pydantic model, and calls the handler resolved through the
  ModuleLoader.
- Tool handlers are plain Python functions named handle_<prefix>_<name> living
  under src/snspd_toolkit/tools/*. They return create_response() dicts; this
  module turns their tables into CSV files (or embeds them) and writes the
  ``<command>.json`` report with the full resolved config for provenance.
"""

from __future__ import annotations

import inspect
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from snspd_toolkit import __version__, config_loader
from snspd_toolkit import utils as config_utils
from snspd_toolkit.config import Settings
from snspd_toolkit.config.run_config import (
    AutocorrConfig,
    CalibrateConfig,
    ContrastConfig,
    DeadTimeConfig,
    DroopConfig,
    EmaConfig,
    EndFaceConfig,
    FitIrfConfig,
    FluxConfig,
    IndexConfig,
    OptimizeConfig,
    PulsedConfig,
    QuarterWaveConfig,
    RunConfig,
    SdeConfig,
    SessionConfig,
    SimulateConfig,
    SolveConfig,
    SpectrumConfig,
    SweepConfig,
    UncertaintyConfig,
)
from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools import initialize_module_loader
from snspd_toolkit.tools.utils import Table, write_csv_table, write_json_report

logger = logging.getLogger("snspd_toolkit")

OUTPUT_FORMATS = ("csv", "json-text")


@dataclass(frozen=True)
class Command:
    handler: str
    model: type[RunConfig]
    help: str


COMMANDS: dict[str, Command] = {
    "index": Command("handle_optics_complexIndex", IndexConfig, "Complex refractive index of a material"),
    "ema": Command("handle_optics_effectiveIndex", EmaConfig, "Effective index of the meander layer"),
    "quarter-wave": Command("handle_tmm_quarterWave", QuarterWaveConfig, "Quarter-wave spacer thickness"),
    "solve": Command("handle_tmm_solve", SolveConfig, "Solve one stack at one wavelength"),
    "spectrum": Command("handle_tmm_spectrum", SpectrumConfig, "R/T/A spectrum of one stack"),
    "sweep": Command("handle_cavity_sweep", SweepConfig, "Absorption map over wavelength x airgap"),
    "optimize": Command("handle_cavity_optimize", OptimizeConfig, "Airgap maximising weighted absorption"),
    "contrast": Command("handle_cavity_contrast", ContrastConfig, "TE/TM absorption contrast"),
    "calibrate": Command("handle_metrology_calibrate", CalibrateConfig, "Attenuation ratio from P1/P2 readings"),
    "flux": Command("handle_metrology_flux", FluxConfig, "Photon flux at the detector"),
    "sde": Command("handle_metrology_sde", SdeConfig, "System detection efficiency"),
    "end-face": Command("handle_metrology_endFace", EndFaceConfig, "Fresnel reflection at the fiber end face"),
    "uncertainty": Command("handle_metrology_uncertainty", UncertaintyConfig, "Combined uncertainty budget"),
    "session": Command("handle_metrology_session", SessionConfig, "Analyse a measurement session file"),
    "deadtime": Command("handle_dynamics_deadTime", DeadTimeConfig, "Dead-time metrics of a recovery curve"),
    "droop": Command("handle_dynamics_droop", DroopConfig, "Rate-dependent efficiency over flux"),
    "pulsed": Command("handle_dynamics_pulsed", PulsedConfig, "Efficiency for a pulsed source"),
    "simulate": Command("handle_timetag_simulate", SimulateConfig, "Monte Carlo time-tag streams"),
    "autocorr": Command("handle_timetag_autocorr", AutocorrConfig, "Consecutive-delay histogram"),
    "fit-irf": Command("handle_timetag_fitIrf", FitIrfConfig, "Gaussian fit of an IRF histogram"),
}


def _config_file_params(command: str, config_file: Path | None) -> dict[str, Any]:
    """Parameters from a ``--config`` file.

    Accepts a flat parameter mapping, a mapping with a section named after the
    command, or a previous ``<command>.json`` report (its embedded config).
    """
    if config_file is None:
        return {}
    if not config_file.exists():
        raise FileNotFoundError(f"Config file not found: {config_file}")
    data = config_loader.load_yaml(config_file)
    embedded = data.get("config")
    if isinstance(embedded, dict) and isinstance(embedded.get("params"), dict):
        if embedded.get("command") not in (None, command):
            raise ValidationError(f"{config_file} holds a '{embedded['command']}' config, not '{command}'")
        return dict(embedded["params"])
    if isinstance(data.get(command), dict):
        return dict(data[command])
    return data


def resolve_run_config(command: str, settings: Settings, config_file: Path | None = None) -> RunConfig:
    """Validated parameters: profile defaults < config file < flags."""
    if command not in COMMANDS:
        raise ValidationError(f"Unknown command '{command}'. Available: {sorted(COMMANDS)}")
    spec = COMMANDS[command]
    params = config_utils.get_profile_run_config(settings.profile, command)
    params.update(_config_file_params(command, config_file))
    if spec.model.workers_setting and "workers" not in params:
        params["workers"] = getattr(settings, spec.model.workers_setting)
    params = spec.model.apply_seed(params, settings.seed)
    return spec.model.model_validate(params)


def _write_tables(tables: list[Table], out_dir: Path, provenance: dict[str, Any], output_format: str) -> dict[str, Any]:
    if output_format == "csv":
        return {t.name: str(write_csv_table(out_dir / f"{t.name}.csv", t, provenance)) for t in tables}
    return {t.name: t.records() for t in tables}


def run_command(command: str, settings: Settings, config_file: Path | None = None) -> dict[str, Any]:
    """Run one command end to end and write its outputs into ``settings.output_dir``."""
    if settings.output_format not in OUTPUT_FORMATS:
        raise ValidationError(f"Unknown output format '{settings.output_format}'. Available: {list(OUTPUT_FORMATS)}")
    run_config = resolve_run_config(command, settings, config_file)
    spec = COMMANDS[command]
    out_dir = Path(settings.output_dir)

    loader = initialize_module_loader([spec.handler])
    handler = loader.get_handler(spec.handler)
    kwargs = run_config.handler_kwargs()
    if "output_dir" in inspect.signature(handler).parameters:
        kwargs["output_dir"] = out_dir

    provenance = {
        "command": command,
        "params": run_config.model_dump(mode="json", exclude_none=True),
        "profile": settings.profile,
        "version": __version__,
    }
    logger.info(f"Running command '{command}'", extra={"handler": spec.handler})
    response = handler(**kwargs)

    tables = response.pop("tables", [])
    key = "files" if settings.output_format == "csv" else "tables"
    if tables:
        response[key] = _write_tables(tables, out_dir, provenance, settings.output_format)
    response["config"] = provenance
    write_json_report(out_dir / f"{command}.json", response)
    return response
