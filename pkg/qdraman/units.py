"""Unit system and physical constants.

Energies and rates are expressed in μeV with ħ = 1, times in ps. A rate
`r` in μeV corresponds to `r / HBAR` per ps, so time arguments are
converted with [`ps_to_internal()`][qdraman.units.ps_to_internal] before
they enter a generator.
"""

from __future__ import annotations

from typing import NamedTuple
from typing import TypeVar

import numpy

HBAR = 658.2119569
"""Reduced Planck constant (μeV·ps)."""
MU_B = 57.8838
"""Bohr magneton (μeV/T)."""
H_PLANCK = 4.135668
"""Planck constant (μeV/GHz)."""

ArrayOrFloat = TypeVar('ArrayOrFloat', float, numpy.ndarray)


class UnitSystem(NamedTuple):
    """Units and constants shared by every model tier."""

    energy_unit: str = 'ueV'
    """Unit of energies, rates and widths."""
    time_unit: str = 'ps'
    """Unit of delays and durations."""
    hbar: float = HBAR
    """Reduced Planck constant (μeV·ps)."""
    mu_b: float = MU_B
    """Bohr magneton (μeV/T)."""
    h: float = H_PLANCK
    """Planck constant (μeV/GHz)."""


UNITS = UnitSystem()


def ghz_to_uev(frequency: ArrayOrFloat) -> ArrayOrFloat:
    """Convert a frequency in GHz to an energy in μeV."""
    return frequency * H_PLANCK


def uev_to_ghz(energy: ArrayOrFloat) -> ArrayOrFloat:
    """Convert an energy in μeV to a frequency in GHz."""
    return energy / H_PLANCK


def ps_to_internal(time: ArrayOrFloat) -> ArrayOrFloat:
    """Convert a time in ps to the internal unit of 1/μeV."""
    return time / HBAR


def internal_to_ps(time: ArrayOrFloat) -> ArrayOrFloat:
    """Convert an internal time in 1/μeV to ps."""
    return time * HBAR


def lifetime_to_rate(lifetime: float) -> float:
    """Convert a 1/e lifetime in ps to a rate in μeV."""
    if lifetime <= 0:
        raise ValueError(f'Lifetime must be positive but got {lifetime}.')
    return HBAR / lifetime


def rate_to_lifetime(rate: float) -> float:
    """Convert a rate in μeV to a 1/e lifetime in ps."""
    if rate <= 0:
        raise ValueError(f'Rate must be positive but got {rate}.')
    return HBAR / rate


def zeeman_splitting(g: float, b: float) -> float:
    """Zeeman splitting of a spin doublet.

    Args:
        g: Landé g-factor.
        b: Magnetic field (T).

    Returns:
        Splitting `g * mu_B * B` in μeV.

    Raises:
        ValueError: If `b` is negative.
    """
    if b < 0:
        raise ValueError(f'Magnetic field must be non-negative but got {b}.')
    return g * MU_B * b


def purcell_rate(coupling: float, kappa: float, detuning: float) -> float:
    """Cavity-enhanced emission rate of a detuned emitter.

    Args:
        coupling: Emitter-cavity coupling g (μeV).
        kappa: Cavity energy decay rate (μeV, the cavity FWHM).
        detuning: Emitter-cavity detuning (μeV).

    Returns:
        Added population decay rate `4 g² κ / (4 δ² + κ²)` in μeV.
    """
    if kappa <= 0:
        raise ValueError(
            f'Cavity decay rate must be positive but got {kappa}.',
        )
    return 4 * coupling**2 * kappa / (4 * detuning**2 + kappa**2)
