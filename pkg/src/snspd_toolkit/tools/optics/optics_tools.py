"""Handlers for material lookups and the meander effective medium."""

import logging
from typing import Any

from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.optics.materials import (
    MaterialCatalog,
    complex_index,
    effective_permittivity,
    index_from_permittivity,
    permittivity_from_index,
)
from snspd_toolkit.tools.optics.optics_types import MeanderGeometry, Polarization
from snspd_toolkit.tools.utils import create_response

logger = logging.getLogger("snspd_toolkit")


def handle_optics_complexIndex(material: str, wavelength_nm: float, catalog: MaterialCatalog | None = None) -> dict:
    """Complex refractive index N = n − i·k of a catalogued material at one wavelength."""
    catalog = catalog or MaterialCatalog()
    table = catalog.table(material)
    N = complex_index(table, wavelength_nm)
    lo, hi = table.range_nm
    return create_response(
        {"material": material, "wavelength_nm": wavelength_nm, "n": N.real, "k": -N.imag},
        metadata={"tool_name": "optics_complexIndex", "table_range_nm": [lo, hi], "convention": "N = n - ik"},
    )


def handle_optics_effectiveIndex(
    geometry: MeanderGeometry | dict[str, Any],
    wire_material: str,
    gap_material: str,
    wavelength_nm: float,
    catalog: MaterialCatalog | None = None,
) -> dict:
    """Effective permittivity and index of the meander layer for both polarizations."""
    catalog = catalog or MaterialCatalog()
    if isinstance(geometry, dict):
        try:
            geometry = MeanderGeometry(**geometry)
        except TypeError as e:
            raise ValidationError(
                f"Meander geometry needs linewidth_nm, pitch_nm, film_thickness_nm, active_radius_um: {e}"
            ) from e
    eps_wire = permittivity_from_index(catalog.index(wire_material, wavelength_nm))
    eps_gap = permittivity_from_index(catalog.index(gap_material, wavelength_nm))
    rows = {}
    for pol in Polarization:
        eps = effective_permittivity(geometry, eps_wire, eps_gap, pol)
        rows[pol.value] = {"permittivity": eps, "index": index_from_permittivity(eps)}
    return create_response(
        rows,
        metadata={
            "tool_name": "optics_effectiveIndex",
            "fill_factor": geometry.fill_factor,
            "wire_material": wire_material,
            "gap_material": gap_material,
            "wavelength_nm": wavelength_nm,
        },
    )
