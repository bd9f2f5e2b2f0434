"""Stack descriptions: the membrane-cavity builder, named presets and stack files.

A stack file is YAML, either a preset reference with overrides::

    preset: membrane-cavity-v1
    gap_nm: 4100
    design: w70-p140

or an explicit layer list::

    name: fresnel
    entry: air
    exit: glass
    materials:            # optional, CSV paths relative to the stack file
      glass: glass.csv
    layers:
      - {material: air, thickness_nm: 1}
      - meander: {linewidth_nm: 50, pitch_nm: 120, film_thickness_nm: 11, active_radius_um: 8}
        wire: NbTiN-illustrative
        gap: air
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from snspd_toolkit import config_loader
from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.optics.materials import MaterialCatalog
from snspd_toolkit.tools.optics.optics_types import MeanderGeometry
from snspd_toolkit.tools.tmm.tmm_types import HomogeneousLayer, Layer, LayerStack, MeanderLayer

logger = logging.getLogger("snspd_toolkit")

CANONICAL_STACK = "membrane-cavity-v1"

# Fabricated meander designs: (line width, pitch) in nm
MEANDER_DESIGNS: dict[str, tuple[float, float]] = {
    "w50-p120": (50.0, 120.0),
    "w70-p140": (70.0, 140.0),
}


@dataclass(frozen=True)
class LoadedStack:
    """A parsed stack together with the material catalogue able to resolve it."""

    stack: LayerStack
    catalog: MaterialCatalog
    description: dict[str, Any]


def membrane_cavity(
    gap_nm: float = 2000.0,
    design: str = "w50-p120",
    film_thickness_nm: float = 11.0,
    active_radius_um: float = 8.0,
    wire_material: str = "NbTiN-illustrative",
    meander_gap_material: str = "air",
    spacer_nm: float = 230.0,
    mirror_nm: float = 200.0,
    entry: str = "SiO2",
    exit: str = "air",
    gap_material: str = "air",
    spacer_material: str = "SiO2",
    mirror_material: str = "Au",
    linewidth_nm: float | None = None,
    pitch_nm: float | None = None,
    name: str = CANONICAL_STACK,
) -> LayerStack:
    """Fiber / airgap / meander / spacer / mirror membrane cavity.

    ``linewidth_nm`` and ``pitch_nm`` override the named ``design``.
    """
    if design not in MEANDER_DESIGNS and (linewidth_nm is None or pitch_nm is None):
        raise ValidationError(f"Unknown meander design '{design}'. Available: {sorted(MEANDER_DESIGNS)}")
    lw, pitch = MEANDER_DESIGNS.get(design, (0.0, 0.0))
    geometry = MeanderGeometry(
        linewidth_nm=float(linewidth_nm if linewidth_nm is not None else lw),
        pitch_nm=float(pitch_nm if pitch_nm is not None else pitch),
        film_thickness_nm=float(film_thickness_nm),
        active_radius_um=float(active_radius_um),
    )
    layers: list[Layer] = []
    if gap_nm > 0:
        layers.append(HomogeneousLayer(gap_material, float(gap_nm), label="airgap", tunable=True))
    layers += [
        MeanderLayer(geometry, wire_material, meander_gap_material),
        HomogeneousLayer(spacer_material, float(spacer_nm), label="spacer"),
        HomogeneousLayer(mirror_material, float(mirror_nm), label="mirror"),
    ]
    return LayerStack(entry, tuple(layers), exit, name=name)


BUILDERS = {"membrane-cavity": membrane_cavity}


def _build_from_preset(preset: str, overrides: dict[str, Any]) -> LayerStack:
    presets = config_loader.load_config("stacks.yml")
    if preset not in presets:
        raise ValidationError(f"Unknown stack preset '{preset}'. Available: {sorted(presets)}")
    params = dict(presets[preset]) | overrides
    builder_name = params.pop("builder", "membrane-cavity")
    if builder_name not in BUILDERS:
        raise ValidationError(f"Stack preset '{preset}' names unknown builder '{builder_name}'")
    params.setdefault("name", preset)
    try:
        return BUILDERS[builder_name](**params)
    except TypeError as e:
        raise ValidationError(f"Invalid parameters for stack preset '{preset}': {e}") from e


def named_stack(name: str = CANONICAL_STACK, **overrides: Any) -> LayerStack:
    """Build a named preset from ``stacks.yml`` with keyword overrides."""
    return _build_from_preset(name, overrides)


def _parse_layer(i: int, spec: Any) -> Layer:
    if not isinstance(spec, dict):
        raise ValidationError(f"Layer {i}: expected a mapping, got {type(spec).__name__}")
    if "meander" in spec:
        try:
            geometry = MeanderGeometry(**spec["meander"])
        except TypeError as e:
            raise ValidationError(f"Layer {i}: invalid meander geometry ({e})") from e
        if "wire" not in spec or "gap" not in spec:
            raise ValidationError(f"Layer {i}: a meander layer needs 'wire' and 'gap' materials")
        return MeanderLayer(geometry, str(spec["wire"]), str(spec["gap"]), label=str(spec.get("label", "meander")))
    if "material" not in spec or "thickness_nm" not in spec:
        raise ValidationError(f"Layer {i}: a homogeneous layer needs 'material' and 'thickness_nm'")
    return HomogeneousLayer(
        str(spec["material"]),
        float(spec["thickness_nm"]),
        label=str(spec.get("label", "")),
        tunable=bool(spec.get("tunable", False)),
    )


def stack_from_mapping(data: dict[str, Any], base_dir: Path | None = None) -> LoadedStack:
    """Build a stack (and its catalogue) from an already-parsed stack description."""
    data = dict(data)
    extra_materials = data.pop("materials", None) or {}
    catalog = MaterialCatalog(base_dir=base_dir)
    if extra_materials:
        catalog = catalog.with_entries(extra_materials, base_dir=base_dir)

    if "preset" in data:
        preset = str(data.pop("preset"))
        stack = _build_from_preset(preset, data)
    else:
        for key in ("entry", "exit", "layers"):
            if key not in data:
                raise ValidationError(f"Stack description lacks '{key}'")
        layers = tuple(_parse_layer(i, spec) for i, spec in enumerate(data["layers"] or []))
        stack = LayerStack(str(data["entry"]), layers, str(data["exit"]), name=str(data.get("name", "")))

    unknown = sorted(m for m in stack.materials() if m not in catalog.names())
    if unknown:
        raise ValidationError(f"Stack '{stack.name or 'unnamed'}' uses unknown materials {unknown}")
    return LoadedStack(stack=stack, catalog=catalog, description=stack.describe())


def load_stack_file(path: str | Path) -> LoadedStack:
    """Parse a YAML stack file; material paths resolve relative to the file."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Stack file not found: {path}")
    data = config_loader.load_yaml(path)
    loaded = stack_from_mapping(data, base_dir=path.parent)
    logger.info(f"Loaded stack '{loaded.stack.name}' from {path}", extra={"layers": len(loaded.stack.layers)})
    return loaded


def resolve_stack(stack: str | Path | dict[str, Any] | None, overrides: dict[str, Any] | None = None) -> LoadedStack:
    """Accept a preset name, a stack file path, or an inline mapping."""
    overrides = overrides or {}
    if stack is None:
        stack = CANONICAL_STACK
    if isinstance(stack, dict):
        return stack_from_mapping(stack | overrides)
    text = str(stack)
    if text.endswith((".yml", ".yaml")) or Path(text).is_file():
        loaded = load_stack_file(text)
        if overrides:
            raise ValidationError("Builder overrides only apply to stack presets, not to stack files")
        return loaded
    return stack_from_mapping({"preset": text} | overrides)
