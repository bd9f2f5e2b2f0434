"""
Tool packages (optics, tmm, cavity, metrology, dynamics, timetag).

Handlers are imported lazily: ``initialize_module_loader`` records which
packages a run needs, after which ``snspd_toolkit.tools.handle_<prefix>_<name>``
resolves through the loader.
"""

from .module_loader import ModuleLoader

_module_loader: ModuleLoader | None = None


def initialize_module_loader(handler_names: list[str]) -> ModuleLoader:
    """Start a fresh loader for the packages owning ``handler_names``."""
    global _module_loader
    _module_loader = ModuleLoader()
    _module_loader.determine_required_modules(handler_names)
    return _module_loader


def get_module_loader() -> ModuleLoader | None:
    return _module_loader


def __getattr__(name: str):
    if _module_loader is not None:
        handler = _module_loader.get_all_functions().get(name)
        if handler is not None:
            return handler
    raise AttributeError(f"module '{__name__}' has no attribute '{name}'")
