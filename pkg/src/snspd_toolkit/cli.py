from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from snspd_toolkit import __version__, config_loader
from snspd_toolkit.app import COMMANDS, OUTPUT_FORMATS, run_command
from snspd_toolkit.config import Settings, settings_from_env
from snspd_toolkit.errors import exit_code_for
from snspd_toolkit.utils import get_profile_settings, setup_logging


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=False, help="YAML/JSON file with the command parameters")
    common.add_argument("--out", type=str, required=False, help="Output directory (default: out)")
    common.add_argument("--seed", type=int, required=False, help="Seed for stochastic commands (u64)")
    common.add_argument("--format", type=str, choices=list(OUTPUT_FORMATS), required=False, dest="output_format")
    common.add_argument("--profile", type=str, required=False, help="Profile name to load from profiles.yml")
    common.add_argument(
        "--config_dir",
        type=str,
        required=False,
        help="Directory for user configuration files (default: current working directory)",
    )
    common.add_argument("--logging_level", type=str, required=False)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snspd-toolkit",
        description="Cavity design, efficiency metrology and detector dynamics for SNSPDs",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = _common_flags()
    for name, command in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=command.help)
    return parser


def parse_args_to_settings(args: argparse.Namespace) -> Settings:
    """Flags win over the profile's ``run:`` section, which wins over the environment."""
    env = settings_from_env()
    profile = args.profile if args.profile is not None else env.profile
    run = get_profile_settings(profile)
    seed = args.seed if args.seed is not None else run.get("seed", env.seed)
    return Settings(
        profile=profile,
        config_dir=args.config_dir if args.config_dir is not None else env.config_dir,
        output_dir=args.out if args.out is not None else run.get("output_dir", env.output_dir),
        output_format=(args.output_format or run.get("output_format") or env.output_format).lower(),
        seed=int(seed) if seed is not None else None,
        logging_level=(args.logging_level or run.get("logging_level") or env.logging_level).upper(),
        file_logs=env.file_logs,
        sweep_workers=int(run.get("sweep_workers", env.sweep_workers)),
        trial_workers=int(run.get("trial_workers", env.trial_workers)),
    )


def _fmt(value: Any, spec: str) -> str:
    return format(value, spec) if isinstance(value, int | float) else str(value)


# One-line summaries printed ahead of the full results
HEADLINES: dict[str, Callable[[dict[str, Any]], str]] = {
    "solve": lambda r: (
        f"R = {_fmt(r['R'], '.6f')}  T = {_fmt(r['T'], '.6f')}  A = {_fmt(r['total_absorption'], '.6f')}  "
        f"R+T+A = {_fmt(r['energy_sum'], '.12f')}"
    ),
    "index": lambda r: f"N = {_fmt(r['n'], '.6g')} - {_fmt(r['k'], '.6g')}i at {_fmt(r['wavelength_nm'], 'g')} nm",
    "quarter-wave": lambda r: f"quarter-wave thickness: {_fmt(r['thickness_nm'], '.2f')} nm",
    "calibrate": lambda r: f"attenuation ratio: {_fmt(r['ratio_db'], '.3f')} dB",
    "end-face": lambda r: f"end-face reflection: {_fmt(100 * r['r_rfl'], '.3f')}%",
    "flux": lambda r: f"photon flux: {_fmt(r['flux_per_s'], '.4g')} /s",
    "sde": lambda r: f"SDE: {_fmt(100 * r['sde'], '.2f')}% +/- {_fmt(100 * r['absolute_uncertainty'], '.2f')}%",
    "uncertainty": lambda r: f"total uncertainty: {_fmt(r['total_percent'], '.2f')}%",
    "fit-irf": lambda r: f"FWHM: {_fmt(r['fwhm'], '.2f')} +/- {_fmt(r['fwhm_std_error'], '.2f')} {r.get('unit', 'ps')}",
}


def print_report(command: str, response: dict[str, Any], stream=None) -> None:
    stream = stream or sys.stdout
    results = response.get("results", {})
    headline = HEADLINES.get(command)
    if headline is not None:
        print(headline(results), file=stream)
    print(json.dumps(results, indent=2, sort_keys=True, default=str), file=stream)
    stream.flush()


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    config_dir = args.config_dir or os.environ.get("CONFIG_DIR")
    config_loader.set_global_config_dir(Path(config_dir).resolve() if config_dir else Path.cwd())

    try:
        settings = parse_args_to_settings(args)
    except Exception as e:
        setup_logging("WARNING").error(f"Invalid settings: {e}")
        return exit_code_for(e)

    logger = setup_logging(settings.logging_level, settings.output_dir if settings.file_logs else None)
    logger.info(f"snspd-toolkit {__version__}: {args.command}", extra={"output_dir": settings.output_dir})
    try:
        response = run_command(args.command, settings, args.config)
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            logger.exception(f"Command '{args.command}' failed unexpectedly")
        else:
            logger.error(f"{type(e).__name__}: {e}", extra={"exit_code": code})
        return code
    finally:
        logging.shutdown()

    print_report(args.command, response)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
