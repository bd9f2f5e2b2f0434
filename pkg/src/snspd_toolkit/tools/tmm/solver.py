"""Characteristic-matrix solver for stratified media at normal incidence.

For a layer of complex index N = n − i·k and thickness d at vacuum wavelength
λ, the phase thickness is δ = 2πNd/λ and the characteristic matrix is

    M = [[cos δ,      i·sin δ / N],
         [i·N·sin δ,  cos δ      ]]

The stack's [B, C] = M₁·M₂·…·M_m·[1, N_s] gives r = (N₀B − C)/(N₀B + C) and
t = 2N₀/(N₀B + C). Per-layer absorptance is the drop of the net Poynting flux
across each layer, found by carrying the exit field (t, N_s·t) back through
the same matrices, so R + T + ΣA = 1 holds up to rounding.

All computations are vectorised over a wavelength grid.
"""

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from snspd_toolkit.errors import ContractError, NumericError
from snspd_toolkit.tools.optics.materials import (
    MaterialCatalog,
    complex_index,
    ema_permittivity,
    index_from_permittivity,
)
from snspd_toolkit.tools.optics.optics_types import DispersionTable, Polarization
from snspd_toolkit.tools.tmm.tmm_types import LayerStack, MeanderLayer, SpectrumResponse, StackResponse

logger = logging.getLogger("snspd_toolkit")

# Fractions may leave [0, 1] by this much from rounding before it counts as a solver fault.
ROUNDOFF_TOLERANCE = 1e-12
# Cap on −Im δ for opaque layers; keeps cos and sin finite.
MAX_ATTENUATION_PHASE = 35.0


def _layer_index(layer, catalog: MaterialCatalog, wl: np.ndarray, pol: Polarization) -> np.ndarray:
    if isinstance(layer, MeanderLayer):
        eps_wire = np.square(catalog.index_array(layer.wire_material, wl))
        eps_gap = np.square(catalog.index_array(layer.gap_material, wl))
        return np.asarray(index_from_permittivity(ema_permittivity(layer.geometry.fill_factor, eps_wire, eps_gap, pol)))
    return catalog.index_array(layer.material, wl)


def _clamp_fractions(values: np.ndarray, quantity: str, wl: np.ndarray) -> np.ndarray:
    """Clamp round-off excursions outside [0, 1]; larger excursions are solver faults."""
    low = values < -ROUNDOFF_TOLERANCE
    high = values > 1.0 + ROUNDOFF_TOLERANCE
    if np.any(low | high):
        idx = np.argwhere(low | high)[0]
        raise NumericError(
            f"{quantity} = {values[tuple(idx)]!r} at {wl[idx[0]]} nm lies outside [0, 1] beyond round-off"
        )
    clamped = np.clip(values, 0.0, 1.0)
    excursion = float(np.max(np.abs(clamped - values), initial=0.0))
    if excursion > 0:
        level = logging.WARNING if excursion > 1e-14 else logging.DEBUG
        logger.log(level, f"Clamped round-off in {quantity}", extra={"quantity": quantity, "excursion": excursion})
    return clamped


def solve_spectrum(
    stack: LayerStack,
    wavelength_nm: Any,
    pol: Polarization = Polarization.TE,
    catalog: MaterialCatalog | None = None,
) -> SpectrumResponse:
    """R, T and per-layer absorptance of a stack over a wavelength grid."""
    catalog = catalog or MaterialCatalog()
    pol = Polarization(pol)
    wl = np.atleast_1d(np.asarray(wavelength_nm, dtype=float))
    if np.any(wl <= 0):
        raise ContractError("Wavelengths must be > 0 nm")

    N0 = catalog.index_array(stack.entry_medium, wl)
    Ns = catalog.index_array(stack.exit_medium, wl)
    if np.any(N0.imag != 0):
        raise ContractError(f"Entry medium '{stack.entry_medium}' must be lossless (k = 0)")

    # Characteristic matrix entries per layer, each of shape (W,)
    matrices = []
    for j, layer in enumerate(stack.layers):
        N = _layer_index(layer, catalog, wl, pol)
        if np.any(N == 0):
            raise NumericError(f"Layer {j} ('{layer.name}') has zero refractive index; characteristic matrix is singular")
        delta = 2.0 * np.pi * N * layer.thickness_nm / wl
        delta = np.where(delta.imag < -MAX_ATTENUATION_PHASE, delta.real - 1j * MAX_ATTENUATION_PHASE, delta)
        cos_d, sin_d = np.cos(delta), np.sin(delta)
        matrices.append((cos_d, 1j * sin_d / N, 1j * N * sin_d, cos_d))

    B = np.ones_like(Ns)
    C = Ns.copy()
    for m11, m12, m21, m22 in reversed(matrices):
        B, C = m11 * B + m12 * C, m21 * B + m22 * C

    denom = N0 * B + C
    if np.any(denom == 0) or not np.all(np.isfinite(denom)):
        raise NumericError("Stack admittance is singular (N0·B + C = 0)")
    r = (N0 * B - C) / denom
    t = 2.0 * N0 / denom

    # Net flux at each interface, walking from the exit back to the entry
    E = t.copy()
    H = Ns * t
    flux = [np.real(E * np.conj(H)) / N0.real]
    for m11, m12, m21, m22 in reversed(matrices):
        E, H = m11 * E + m12 * H, m21 * E + m22 * H
        flux.append(np.real(E * np.conj(H)) / N0.real)
    flux.reverse()  # flux[j] enters layer j, flux[j + 1] leaves it

    R = np.abs(r) ** 2
    T = flux[-1]  # Re(Ns)·|t|²/N0
    A = np.stack([flux[j] - flux[j + 1] for j in range(len(matrices))], axis=1)

    R = _clamp_fractions(R, "R", wl)
    T = _clamp_fractions(T, "T", wl)
    A = _clamp_fractions(A, "A", wl)

    return SpectrumResponse(
        wavelength_nm=wl,
        polarization=pol,
        R=R,
        T=T,
        A=A,
        layer_labels=tuple(layer.name for layer in stack.layers),
    )


def solve_stack(
    stack: LayerStack,
    wavelength_nm: float,
    pol: Polarization = Polarization.TE,
    catalog: MaterialCatalog | None = None,
) -> StackResponse:
    """R, T and per-layer absorptance at one wavelength."""
    return solve_spectrum(stack, [wavelength_nm], pol, catalog).at(0)


def detector_absorption_spectrum(
    stack: LayerStack,
    wavelength_nm: Any,
    pol: Polarization | None = Polarization.TE,
    catalog: MaterialCatalog | None = None,
) -> np.ndarray:
    """Meander-layer absorptance over a wavelength grid; ``pol=None`` averages TE and TM."""
    idx = stack.meander_index
    if idx is None:
        raise ContractError(f"Stack '{stack.name or 'unnamed'}' has no meander layer to report absorption for")
    catalog = catalog or MaterialCatalog()
    if pol is None:
        te = solve_spectrum(stack, wavelength_nm, Polarization.TE, catalog).A[:, idx]
        tm = solve_spectrum(stack, wavelength_nm, Polarization.TM, catalog).A[:, idx]
        return 0.5 * (te + tm)
    return solve_spectrum(stack, wavelength_nm, pol, catalog).A[:, idx]


def detector_absorption(
    stack: LayerStack,
    wavelength_nm: float,
    pol: Polarization | None = Polarization.TE,
    catalog: MaterialCatalog | None = None,
) -> float:
    """Absorptance of the meander layer at one wavelength."""
    return float(detector_absorption_spectrum(stack, [wavelength_nm], pol, catalog)[0])


def quarter_wave_thickness(table: DispersionTable, wavelength_nm: float) -> float:
    """Physical thickness of a quarter-wave layer, λ / (4n)."""
    return wavelength_nm / (4.0 * complex_index(table, wavelength_nm).real)
