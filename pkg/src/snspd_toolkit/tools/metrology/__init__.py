# metrology/__init__.py
"""
Efficiency-measurement tools: attenuation, photon flux, SDE and uncertainty.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .metrology_tools import (
    handle_metrology_calibrate,
    handle_metrology_endFace,
    handle_metrology_flux,
    handle_metrology_sde,
    handle_metrology_session,
    handle_metrology_uncertainty,
)
