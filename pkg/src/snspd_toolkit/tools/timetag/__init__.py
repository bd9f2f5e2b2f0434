# timetag/__init__.py
"""
Time-tag lab: Monte Carlo detection streams, consecutive-delay auto-correlation
and Gaussian IRF fitting.

Re-exports the handle_* functions so the ModuleLoader discovers them.
"""

from .timetag_tools import handle_timetag_autocorr, handle_timetag_fitIrf, handle_timetag_simulate
