"""Handlers for the stratified-media solver."""

import logging
from typing import Any

import numpy as np

from snspd_toolkit.tools.optics.materials import MaterialCatalog
from snspd_toolkit.tools.optics.optics_types import Polarization
from snspd_toolkit.tools.tmm.solver import quarter_wave_thickness, solve_spectrum, solve_stack
from snspd_toolkit.tools.tmm.stacks import resolve_stack
from snspd_toolkit.tools.utils import Table, create_response, uniform_grid

logger = logging.getLogger("snspd_toolkit")


def handle_tmm_solve(
    stack: Any = None,
    wavelength_nm: float = 1350.0,
    polarization: str = "TE",
    gap_nm: float | None = None,
    overrides: dict[str, Any] | None = None,
) -> dict:
    """Solve one (wavelength, polarization, airgap) point.

    Arguments:
      stack         - preset name, stack file path or inline mapping (default membrane-cavity-v1)
      wavelength_nm - vacuum wavelength
      polarization  - TE (E parallel to wires) or TM
      gap_nm        - optional airgap override
    """
    loaded = resolve_stack(stack, overrides)
    layer_stack = loaded.stack if gap_nm is None else loaded.stack.with_gap(gap_nm)
    response = solve_stack(layer_stack, wavelength_nm, Polarization(polarization), loaded.catalog)

    layers = [
        {"index": i, "label": label, "absorptance": a}
        for i, (label, a) in enumerate(zip(response.layer_labels, response.per_layer_A))
    ]
    results = {
        "wavelength_nm": response.wavelength_nm,
        "polarization": response.polarization,
        "R": response.R,
        "T": response.T,
        "layers": layers,
        "total_absorption": response.total_absorption,
        "energy_sum": response.R + response.T + response.total_absorption,
        "energy_residual": response.energy_residual,
    }
    idx = layer_stack.meander_index
    if idx is not None:
        results["detector_absorption"] = response.per_layer_A[idx]
    logger.info(
        "Solved stack",
        extra={"stack": layer_stack.name, "wavelength_nm": wavelength_nm, "energy_residual": response.energy_residual},
    )
    return create_response(
        results,
        metadata={"tool_name": "tmm_solve", "stack": layer_stack.describe(), "units": {"wavelength": "nm"}},
        tables=[Table("layers", ("index", "label", "absorptance"), [tuple(row.values()) for row in layers])],
    )


def handle_tmm_spectrum(
    stack: Any = None,
    wavelength_start_nm: float = 1260.0,
    wavelength_stop_nm: float = 1650.0,
    wavelength_step_nm: float = 1.0,
    polarization: str = "TE",
    gap_nm: float | None = None,
    overrides: dict[str, Any] | None = None,
) -> dict:
    """R, T and every layer's absorptance over a wavelength range."""
    loaded = resolve_stack(stack, overrides)
    layer_stack = loaded.stack if gap_nm is None else loaded.stack.with_gap(gap_nm)
    wl = uniform_grid(wavelength_start_nm, wavelength_stop_nm, wavelength_step_nm)
    spectrum = solve_spectrum(layer_stack, wl, Polarization(polarization), loaded.catalog)
    columns = ("wavelength_nm", "R", "T", *(f"A_{label}" for label in spectrum.layer_labels))
    rows = np.column_stack([spectrum.wavelength_nm, spectrum.R, spectrum.T, spectrum.A])
    return create_response(
        {
            "points": int(wl.size),
            "max_energy_residual": float(np.max(np.abs(spectrum.energy_residual))),
        },
        metadata={"tool_name": "tmm_spectrum", "stack": layer_stack.describe(), "polarization": polarization},
        tables=[Table("spectrum", columns, rows)],
    )


def handle_tmm_quarterWave(material: str, wavelength_nm: float, catalog: MaterialCatalog | None = None) -> dict:
    """Quarter-wave physical thickness of a material at a design wavelength."""
    catalog = catalog or MaterialCatalog()
    thickness = quarter_wave_thickness(catalog.table(material), wavelength_nm)
    return create_response(
        {"material": material, "wavelength_nm": wavelength_nm, "thickness_nm": thickness},
        metadata={"tool_name": "tmm_quarterWave"},
    )

