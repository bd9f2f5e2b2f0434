"""
Lazy import of tool packages.

A command names one ``handle_<prefix>_<name>`` function; only the package for
that prefix is imported, so a metrology run never pays for scipy.signal or
the process pool machinery of the time-tag lab.
"""

import importlib
import inspect
import logging
from collections.abc import Callable
from types import ModuleType

logger = logging.getLogger("snspd_toolkit.module_loader")

HANDLER_PREFIX = "handle_"


class ModuleLoader:
    """Import tool packages on first use and look handlers up in them."""

    # Tool prefix -> package path
    MODULE_MAP = {
        "optics": "snspd_toolkit.tools.optics",
        "tmm": "snspd_toolkit.tools.tmm",
        "cavity": "snspd_toolkit.tools.cavity",
        "metrology": "snspd_toolkit.tools.metrology",
        "dynamics": "snspd_toolkit.tools.dynamics",
        "timetag": "snspd_toolkit.tools.timetag",
    }

    def __init__(self) -> None:
        self._modules: dict[str, ModuleType] = {}
        self._broken: set[str] = set()
        self._required: set[str] = set()

    def prefix_of(self, handler_name: str) -> str | None:
        """Tool prefix of ``handle_<prefix>_<name>``, or None if no package owns it."""
        stem = handler_name.removeprefix(HANDLER_PREFIX)
        return next((p for p in self.MODULE_MAP if stem.startswith(p + "_")), None)

    def determine_required_modules(self, handler_names: list[str]) -> list[str]:
        """Record and return the sorted prefixes the given handlers live in."""
        required = set()
        for name in handler_names:
            prefix = self.prefix_of(name)
            if prefix is None:
                logger.warning(f"No tool package provides '{name}'")
            else:
                required.add(prefix)
        self._required = required
        return sorted(required)

    def is_module_required(self, module_name: str) -> bool:
        return module_name in self._required

    def load_module(self, module_name: str) -> ModuleType | None:
        """Import a tool package once; unknown or unimportable packages give None."""
        if module_name in self._modules:
            return self._modules[module_name]
        if module_name in self._broken:
            return None
        path = self.MODULE_MAP.get(module_name)
        if path is None:
            logger.warning(f"Unknown tool package: {module_name}")
            return None
        try:
            module = importlib.import_module(path)
        except ImportError as e:
            self._broken.add(module_name)
            logger.error(f"Cannot import {path}: {e}")
            return None
        self._modules[module_name] = module
        logger.debug(f"Imported {path}")
        return module

    def get_all_functions(self) -> dict[str, Callable[..., dict]]:
        """Every ``handle_*`` function of the required packages."""
        functions: dict[str, Callable[..., dict]] = {}
        for prefix in sorted(self._required):
            module = self.load_module(prefix)
            if module is None:
                continue
            functions.update(
                (name, fn) for name, fn in inspect.getmembers(module, inspect.isfunction) if name.startswith(HANDLER_PREFIX)
            )
        return functions

    def get_handler(self, handler_name: str) -> Callable[..., dict]:
        """Resolve one handler, importing its package on demand."""
        prefix = self.prefix_of(handler_name)
        module = self.load_module(prefix) if prefix else None
        handler = getattr(module, handler_name, None)
        if not callable(handler):
            raise LookupError(f"Handler '{handler_name}' is not available")
        return handler
