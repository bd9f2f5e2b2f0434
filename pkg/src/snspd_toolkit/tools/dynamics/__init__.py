# dynamics/__init__.py
"""
Detector recovery tools: pulse shape, dead-time metrics, rate-dependent efficiency.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .dynamics_tools import handle_dynamics_deadTime, handle_dynamics_droop, handle_dynamics_pulsed
