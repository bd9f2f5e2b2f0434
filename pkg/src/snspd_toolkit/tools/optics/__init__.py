# optics/__init__.py
"""
Material optics tools: dispersion tables and the meander effective medium.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .optics_tools import handle_optics_complexIndex, handle_optics_effectiveIndex
