# tmm/__init__.py
"""
Transfer-matrix solver tools for the membrane cavity.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .tmm_tools import handle_tmm_quarterWave, handle_tmm_solve, handle_tmm_spectrum
