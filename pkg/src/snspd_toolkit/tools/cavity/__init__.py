# cavity/__init__.py
"""
Cavity design tools: absorption maps, peak analysis, gap optimisation.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .cavity_tools import handle_cavity_contrast, handle_cavity_optimize, handle_cavity_sweep
