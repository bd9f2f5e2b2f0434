"""Lazy handler loading."""

import pytest

from snspd_toolkit import tools
from snspd_toolkit.app import COMMANDS
from snspd_toolkit.tools import initialize_module_loader
from snspd_toolkit.tools.module_loader import ModuleLoader


def test_prefix_of():
    loader = ModuleLoader()
    assert loader.prefix_of("handle_tmm_solve") == "tmm"
    assert loader.prefix_of("handle_timetag_fitIrf") == "timetag"
    assert loader.prefix_of("handle_teleport_now") is None


def test_required_modules_follow_handlers():
    loader = ModuleLoader()
    assert loader.determine_required_modules(["handle_cavity_sweep", "handle_tmm_solve", "handle_x_y"]) == [
        "cavity",
        "tmm",
    ]
    assert loader.is_module_required("cavity")
    assert not loader.is_module_required("metrology")


def test_every_command_handler_resolves():
    loader = ModuleLoader()
    for command in COMMANDS.values():
        assert callable(loader.get_handler(command.handler))
    with pytest.raises(LookupError):
        loader.get_handler("handle_tmm_teleport")
    with pytest.raises(LookupError):
        loader.get_handler("handle_nothing")


def test_unknown_module_is_not_loaded():
    assert ModuleLoader().load_module("teleport") is None


def test_package_exposes_loaded_handlers():
    initialize_module_loader(["handle_dynamics_droop"])
    functions = tools.get_module_loader().get_all_functions()
    assert "handle_dynamics_deadTime" in functions
    assert "handle_tmm_solve" not in functions
    assert tools.handle_dynamics_pulsed is functions["handle_dynamics_pulsed"]
    with pytest.raises(AttributeError):
        _ = tools.handle_tmm_solve
