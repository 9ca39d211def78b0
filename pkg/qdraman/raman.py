"""Perturbative model of cavity-stimulated Raman emission.

Each Raman process is a laser-driven Λ transition followed by emission
into the cavity. To second order its intensity is the product of the
laser's Lorentzian detuning factor from the driven leg and the cavity
density of states at the emitted energy:

* I_S ∝ μ²μ² / ((ω_L - ω_pump,S)² + γ²) · D(ω_L - E_z)
* I_AS ∝ μ²μ² / ((ω_L - ω_pump,AS)² + γ²) · D(ω_L + E_z)

Equal spin populations are assumed and saturation is ignored. Only ratios
and lineshapes are meaningful since the global scale is arbitrary.
"""

from __future__ import annotations

import concurrent.futures
import logging
import math
from collections.abc import Sequence
from typing import Literal
from typing import NamedTuple

import numpy

from qdraman.device import build_level_structure
from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.device import Transition
from qdraman.exceptions import UndefinedSelectivityError
from qdraman.instrument import cavity_factor
from qdraman.instrument import drive_factor
from qdraman.spectrum import Spectrum
from qdraman.spectrum import uniform_grid

logger = logging.getLogger(__name__)

Pin = Literal['antistokes', 'stokes']


class RamanIntensities(NamedTuple):
    """Stokes and anti-Stokes intensities for one laser energy."""

    stokes: float
    """Stokes intensity I_S (relative)."""
    antistokes: float
    """Anti-Stokes intensity I_AS (relative)."""
    laser_energy: float
    """Laser energy ω_L (μeV)."""
    stokes_energy: float
    """Stokes photon energy ω_L - E_z (μeV)."""
    antistokes_energy: float
    """Anti-Stokes photon energy ω_L + E_z (μeV)."""


def cavity_dos(
    energy: float | numpy.ndarray,
    cavity_energy: float,
    hwhm: float,
) -> float | numpy.ndarray:
    """Cavity photon density of states, normalized to 1 at resonance.

    Args:
        energy: Photon energy (μeV).
        cavity_energy: Cavity resonance ω_c (μeV).
        hwhm: Cavity half width Γ (μeV). `math.inf` gives a flat density.

    Returns:
        `Γ² / ((ω - ω_c)² + Γ²)`.

    Raises:
        ValueError: If `hwhm` is not positive.
    """
    if not hwhm > 0:
        raise ValueError(f'Cavity half width must be positive but got {hwhm}.')
    if math.isinf(hwhm):
        return numpy.ones_like(numpy.asarray(energy, dtype=float))[()]
    detuning = numpy.asarray(energy, dtype=float) - cavity_energy
    return (hwhm**2 / (detuning**2 + hwhm**2))[()]


def _lambda_weight(
    params: DeviceParameters,
    pump: Transition,
    emission: Transition,
) -> float:
    dipoles = params.dipoles
    theta = params.polarization_mixing_angle
    return (
        dipoles.moment(pump.trion, pump.ground) ** 2
        * dipoles.moment(emission.trion, emission.ground) ** 2
        * drive_factor(pump.role, theta)
        * cavity_factor(emission.role, theta)
    )


def _intensities(
    lasers: numpy.ndarray,
    params: DeviceParameters,
    levels: LevelStructure,
) -> tuple[numpy.ndarray, numpy.ndarray]:
    cavity_hwhm = params.cavity_hwhm
    assert cavity_hwhm is not None
    gamma = params.qd_hwhm
    splitting = levels.electron_zeeman
    stokes_pump = levels.stokes_pump
    antistokes_pump = levels.antistokes_pump

    stokes = (
        _lambda_weight(params, stokes_pump, levels.stokes_emission)
        / ((lasers - stokes_pump.energy) ** 2 + gamma**2)
        * cavity_dos(lasers - splitting, params.cavity_energy, cavity_hwhm)
    )
    antistokes = (
        _lambda_weight(params, antistokes_pump, levels.antistokes_emission)
        / ((lasers - antistokes_pump.energy) ** 2 + gamma**2)
        * cavity_dos(lasers + splitting, params.cavity_energy, cavity_hwhm)
    )
    return stokes, antistokes


def raman_intensities(
    laser_energy: float,
    params: DeviceParameters,
    levels: LevelStructure,
) -> RamanIntensities:
    """Stokes and anti-Stokes intensities for one laser energy.

    Args:
        laser_energy: Laser energy ω_L (μeV).
        params: Device parameters.
        levels: Level structure of `params`.

    Returns:
        Intensities and photon energies of both sidebands.
    """
    stokes, antistokes = _intensities(
        numpy.array([laser_energy], dtype=float),
        params,
        levels,
    )
    return RamanIntensities(
        stokes=float(stokes[0]),
        antistokes=float(antistokes[0]),
        laser_energy=laser_energy,
        stokes_energy=laser_energy - levels.electron_zeeman,
        antistokes_energy=laser_energy + levels.electron_zeeman,
    )


def excitation_spectrum(
    laser_grid: Sequence[float] | numpy.ndarray,
    params: DeviceParameters,
    levels: LevelStructure,
) -> tuple[Spectrum, Spectrum]:
    """Raman intensities as a function of laser energy.

    Args:
        laser_grid: Strictly increasing laser energies (μeV).
        params: Device parameters.
        levels: Level structure of `params`.

    Returns:
        Tuple of the Stokes and anti-Stokes excitation spectra.

    Raises:
        ValueError: If the grid is empty.
    """
    lasers = numpy.asarray(laser_grid, dtype=float)
    if lasers.size == 0:
        raise ValueError('Laser grid must not be empty.')
    stokes, antistokes = _intensities(lasers, params, levels)
    return Spectrum(lasers, stokes), Spectrum(lasers, antistokes)


def pinned_laser_energy(
    params: DeviceParameters,
    levels: LevelStructure,
    pin: Pin = 'antistokes',
) -> float:
    """Laser energy that puts one sideband on the cavity peak."""
    if pin == 'antistokes':
        return params.cavity_energy - levels.electron_zeeman
    elif pin == 'stokes':
        return params.cavity_energy + levels.electron_zeeman
    raise ValueError(f"pin must be 'antistokes' or 'stokes' but got {pin!r}.")


def selectivity(
    b: float,
    params: DeviceParameters,
    pin: Pin = 'antistokes',
) -> float:
    """Spin selectivity (I_AS - I_S) / (I_AS + I_S) at field `b`.

    The laser is placed so that the pinned sideband lands on the cavity
    peak at every field.

    Args:
        b: Magnetic field (T).
        params: Device parameters; the field is replaced by `b`.
        pin: Sideband held on the cavity peak.

    Returns:
        Selectivity in [-1, 1].

    Raises:
        UndefinedSelectivityError: If neither sideband emits.
    """
    at_field = params.replace(magnetic_field=b)
    levels = build_level_structure(at_field)
    laser = pinned_laser_energy(at_field, levels, pin)
    intensities = raman_intensities(laser, at_field, levels)
    total = intensities.stokes + intensities.antistokes
    if total == 0:
        raise UndefinedSelectivityError(
            f'Both sidebands vanish at B = {b} T so the selectivity is '
            'undefined.',
        )
    return (intensities.antistokes - intensities.stokes) / total


def selectivity_sweep(
    fields: Sequence[float] | numpy.ndarray,
    params: DeviceParameters,
    pin: Pin = 'antistokes',
    *,
    workers: int | None = None,
) -> numpy.ndarray:
    """Evaluate [`selectivity()`][qdraman.raman.selectivity] over fields.

    Points are evaluated concurrently; the result order follows `fields`.
    """
    fields = [float(b) for b in fields]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(lambda b: selectivity(b, params, pin), fields))
    return numpy.array(values)


def lorentzian_density(
    grid: numpy.ndarray,
    center: float,
    hwhm: float,
) -> numpy.ndarray:
    """Unit-area Lorentzian of half width `hwhm`."""
    return hwhm / numpy.pi / ((grid - center) ** 2 + hwhm**2)


def sideband_lineshape(
    laser_energy: float,
    params: DeviceParameters,
    levels: LevelStructure,
    grid: Sequence[float] | numpy.ndarray | None = None,
    *,
    step: float = 0.1,
    window: float = 30.0,
) -> Spectrum:
    """Emission spectrum of both Raman sidebands.

    Each sideband is a Lorentzian of FWHM 2γ_s centered at ω_L ∓ E_z whose
    area equals the corresponding Raman intensity.

    Args:
        laser_energy: Laser energy ω_L (μeV).
        params: Device parameters.
        levels: Level structure of `params`.
        grid: Optional emission energies (μeV). Defaults to a uniform grid of
            spacing `step` extending `window` beyond both sidebands.
        step: Default grid spacing (μeV).
        window: Default margin around the sidebands (μeV).

    Returns:
        Sideband emission spectrum.

    Raises:
        ValueError: If the spin dephasing rate is not positive.
    """
    hwhm = params.spin_dephasing_rate
    if hwhm <= 0:
        raise ValueError(
            f'Spin dephasing rate must be positive but got {hwhm}.',
        )
    splitting = levels.electron_zeeman
    if grid is None:
        energies = uniform_grid(laser_energy, splitting + window, step)
    else:
        energies = numpy.asarray(grid, dtype=float)
    intensities = raman_intensities(laser_energy, params, levels)
    values = intensities.stokes * lorentzian_density(
        energies,
        intensities.stokes_energy,
        hwhm,
    ) + intensities.antistokes * lorentzian_density(
        energies,
        intensities.antistokes_energy,
        hwhm,
    )
    return Spectrum(energies, values)


def asymmetry_ratio(
    detuning: float,
    params: DeviceParameters,
    levels: LevelStructure,
) -> float:
    """Ratio of total Raman emission on the cavity side to the far side.

    Args:
        detuning: Laser detuning from E_X (μeV), applied with both signs.
        params: Device parameters.
        levels: Level structure of `params`.

    Returns:
        (I_S + I_AS) at E_X - `detuning` over (I_S + I_AS) at
        E_X + `detuning`.
    """
    center = params.qd_center_energy
    red = raman_intensities(center - detuning, params, levels)
    blue = raman_intensities(center + detuning, params, levels)
    blue_total = blue.stokes + blue.antistokes
    if blue_total == 0:
        raise UndefinedSelectivityError(
            'Raman emission vanishes on the blue side so the asymmetry '
            'ratio is undefined.',
        )
    return (red.stokes + red.antistokes) / blue_total


def reflectance_markers(
    grid: Sequence[float] | numpy.ndarray,
    params: DeviceParameters,
    levels: LevelStructure,
) -> Spectrum:
    """Lorentzian markers of the reflectance resonances.

    Each optical transition contributes a peak of FWHM 2γ and the cavity a
    peak of FWHM 2Γ, all of unit height. The dispersive shape of the
    measured reflectance is not modeled.
    """
    assert params.cavity_hwhm is not None
    energies = numpy.asarray(grid, dtype=float)
    gamma = params.qd_hwhm
    values = numpy.asarray(
        cavity_dos(energies, params.cavity_energy, params.cavity_hwhm),
        dtype=float,
    ).copy()
    for energy in levels.transition_energies:
        values += gamma**2 / ((energies - energy) ** 2 + gamma**2)
    return Spectrum(energies, values)
