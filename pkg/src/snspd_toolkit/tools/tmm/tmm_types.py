"""Domain types for the stratified-media solver: layers, stacks and responses."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from snspd_toolkit.errors import ContractError, ValidationError
from snspd_toolkit.tools.optics.optics_types import MeanderGeometry, Polarization


@dataclass(frozen=True)
class HomogeneousLayer:
    material: str
    thickness_nm: float
    label: str = ""
    tunable: bool = False  # the airgap; adjusted by LayerStack.with_gap

    def __post_init__(self):
        if not self.thickness_nm > 0:
            raise ValidationError(f"Layer '{self.label or self.material}' thickness must be > 0 nm, got {self.thickness_nm}")

    @property
    def name(self) -> str:
        return self.label or self.material

    def materials(self) -> tuple[str, ...]:
        return (self.material,)


@dataclass(frozen=True)
class MeanderLayer:
    """Nanowire grating collapsed to a homogeneous anisotropic film."""

    geometry: MeanderGeometry
    wire_material: str
    gap_material: str
    label: str = "meander"
    tunable: bool = field(default=False, init=False)

    @property
    def thickness_nm(self) -> float:
        return self.geometry.film_thickness_nm

    @property
    def name(self) -> str:
        return self.label

    def materials(self) -> tuple[str, ...]:
        return (self.wire_material, self.gap_material)


Layer = HomogeneousLayer | MeanderLayer


@dataclass(frozen=True)
class LayerStack:
    """Semi-infinite entry medium, interior layers (light enters at layers[0]), semi-infinite exit medium."""

    entry_medium: str
    layers: tuple[Layer, ...]
    exit_medium: str
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValidationError("A layer stack needs at least one interior layer")
        meanders = [i for i, layer in enumerate(self.layers) if isinstance(layer, MeanderLayer)]
        if len(meanders) > 1:
            raise ValidationError(f"A layer stack holds at most one meander layer, found {len(meanders)} at {meanders}")
        if sum(1 for layer in self.layers if layer.tunable) > 1:
            raise ValidationError("A layer stack holds at most one tunable (airgap) layer")

    @property
    def meander_index(self) -> int | None:
        for i, layer in enumerate(self.layers):
            if isinstance(layer, MeanderLayer):
                return i
        return None

    @property
    def meander(self) -> MeanderLayer:
        idx = self.meander_index
        if idx is None:
            raise ContractError(f"Stack '{self.name or 'unnamed'}' has no meander layer")
        layer = self.layers[idx]
        assert isinstance(layer, MeanderLayer)
        return layer

    @property
    def gap_index(self) -> int | None:
        for i, layer in enumerate(self.layers):
            if layer.tunable:
                return i
        return None

    @property
    def gap_nm(self) -> float:
        idx = self.gap_index
        return 0.0 if idx is None else float(self.layers[idx].thickness_nm)

    def materials(self) -> set[str]:
        names = {self.entry_medium, self.exit_medium}
        for layer in self.layers:
            names.update(layer.materials())
        return names

    def with_gap(self, gap_nm: float, gap_material: str = "air") -> LayerStack:
        """Copy with the tunable airgap set to ``gap_nm``; a zero gap removes the layer.

        A stack whose gap was removed gets it back in front of the first layer.
        """
        if gap_nm < 0:
            raise ValidationError(f"Airgap must be >= 0 nm, got {gap_nm}")
        idx = self.gap_index
        layers = list(self.layers)
        if idx is None:
            if gap_nm == 0:
                return self
            layers.insert(0, HomogeneousLayer(gap_material, gap_nm, label="airgap", tunable=True))
            return replace(self, layers=tuple(layers))
        if gap_nm == 0:
            del layers[idx]
            if not layers:
                raise ContractError("Removing the airgap would leave the stack without interior layers")
        else:
            old = layers[idx]
            assert isinstance(old, HomogeneousLayer)
            layers[idx] = replace(old, thickness_nm=float(gap_nm))
        return replace(self, layers=tuple(layers))

    def with_thickness(self, label: str, thickness_nm: float) -> LayerStack:
        """Copy with the homogeneous layer called ``label`` set to a new thickness."""
        layers = list(self.layers)
        for i, layer in enumerate(layers):
            if isinstance(layer, HomogeneousLayer) and layer.name == label:
                layers[i] = replace(layer, thickness_nm=float(thickness_nm))
                return replace(self, layers=tuple(layers))
        raise ContractError(f"Stack '{self.name or 'unnamed'}' has no homogeneous layer labelled '{label}'")

    def reversed(self) -> LayerStack:
        """The same stack illuminated from the exit side."""
        return LayerStack(self.exit_medium, tuple(reversed(self.layers)), self.entry_medium, name=self.name)

    def describe(self) -> dict:
        rows = []
        for layer in self.layers:
            if isinstance(layer, MeanderLayer):
                g = layer.geometry
                rows.append(
                    {
                        "kind": "meander",
                        "label": layer.label,
                        "wire": layer.wire_material,
                        "gap": layer.gap_material,
                        "linewidth_nm": g.linewidth_nm,
                        "pitch_nm": g.pitch_nm,
                        "thickness_nm": g.film_thickness_nm,
                        "active_radius_um": g.active_radius_um,
                    }
                )
            else:
                rows.append(
                    {
                        "kind": "homogeneous",
                        "label": layer.name,
                        "material": layer.material,
                        "thickness_nm": layer.thickness_nm,
                        "tunable": layer.tunable,
                    }
                )
        return {"name": self.name, "entry": self.entry_medium, "exit": self.exit_medium, "layers": rows}


@dataclass(frozen=True)
class StackResponse:
    wavelength_nm: float
    polarization: Polarization
    R: float
    T: float
    per_layer_A: tuple[float, ...]
    layer_labels: tuple[str, ...] = ()

    @property
    def total_absorption(self) -> float:
        return float(sum(self.per_layer_A))

    @property
    def energy_residual(self) -> float:
        """R + T + ΣA − 1."""
        return self.R + self.T + self.total_absorption - 1.0


@dataclass(frozen=True, eq=False)
class SpectrumResponse:
    """Solver output over a wavelength grid; A has shape (wavelengths, layers)."""

    wavelength_nm: np.ndarray
    polarization: Polarization
    R: np.ndarray
    T: np.ndarray
    A: np.ndarray
    layer_labels: tuple[str, ...] = ()

    def at(self, i: int) -> StackResponse:
        return StackResponse(
            wavelength_nm=float(self.wavelength_nm[i]),
            polarization=self.polarization,
            R=float(self.R[i]),
            T=float(self.T[i]),
            per_layer_A=tuple(float(a) for a in self.A[i]),
            layer_labels=self.layer_labels,
        )

    @property
    def energy_residual(self) -> np.ndarray:
        return self.R + self.T + self.A.sum(axis=1) - 1.0
