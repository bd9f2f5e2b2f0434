"""
snspd_toolkit
=============

Cavity design, efficiency metrology, recovery dynamics and time-tag
simulation for superconducting nanowire single-photon detectors.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("snspd-cavity-toolkit")
except PackageNotFoundError:
    __version__ = "0.0.0"

from . import cli


def main() -> None:
    """Console script ``snspd-toolkit``; exits with the command's status code."""
    raise SystemExit(cli.main())


__all__ = ["cli", "main"]
