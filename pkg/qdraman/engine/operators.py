"""Hamiltonian and collapse channels of the driven dot-cavity system."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy

from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.engine.hilbert import HilbertSpace
from qdraman.instrument import cavity_factor
from qdraman.instrument import drive_factor


class CollapseChannel(NamedTuple):
    """Lindblad jump operator with its rate."""

    name: str
    """Channel label used in reports."""
    operator: numpy.ndarray
    """Jump operator C on the full space."""
    rate: float
    """Rate r (μeV) in r (C ρ C† - {C†C, ρ}/2)."""


def hamiltonian(
    space: HilbertSpace,
    params: DeviceParameters,
    levels: LevelStructure,
    laser_energy: float,
    coupling: float,
    rabi: float | None = None,
) -> numpy.ndarray:
    """Rotating-frame Hamiltonian in the rotating-wave approximation.

    H = Δ_c a†a + Σ ε_g |g><g| + Σ (ε_T - ω_L) |T><T|
        + Σ_legs (Ω/2) μ p_L (σ + σ†)
        + Σ_legs g_c μ p_c (a†σ + σ†a)

    where σ = |g><T| is the lowering operator of a leg, μ its dipole and
    p_L, p_c its amplitude projections on the laser and cavity
    polarizations.

    Args:
        space: Hilbert space.
        params: Device parameters.
        levels: Level structure of `params`.
        laser_energy: Laser energy ω_L, the frame frequency (μeV).
        coupling: Dot-cavity coupling g_c (μeV).
        rabi: Laser Rabi energy; defaults to `params.drive_rabi`.

    Returns:
        Hermitian matrix over `space` (μeV).
    """
    rabi = params.drive_rabi if rabi is None else rabi
    theta = params.polarization_mixing_angle
    a = space.destroy()
    a_dag = a.conj().T

    h = (params.cavity_energy - laser_energy) * (a_dag @ a)
    energy_down, energy_up = levels.ground_energies
    energy_t1, energy_t2 = levels.trion_energies
    h = h + energy_down * space.projector('down')
    h = h + energy_up * space.projector('up')
    h = h + (energy_t1 - laser_energy) * space.projector('T1')
    h = h + (energy_t2 - laser_energy) * space.projector('T2')

    for transition in levels.transitions:
        moment = params.dipoles.moment(transition.trion, transition.ground)
        lowering = space.qd_transition(transition.ground, transition.trion)
        raising = lowering.conj().T
        drive = 0.5 * rabi * moment
        drive *= math.sqrt(drive_factor(transition.role, theta))
        if drive != 0:
            h = h + drive * (lowering + raising)
        cavity = coupling * moment
        cavity *= math.sqrt(cavity_factor(transition.role, theta))
        if cavity != 0:
            h = h + cavity * (a_dag @ lowering + raising @ a)
    return h


def collapse_channels(
    space: HilbertSpace,
    params: DeviceParameters,
) -> tuple[CollapseChannel, ...]:
    """Dissipative channels of the device.

    * `cavity`: photon loss at κ = 2Γ.
    * `radiative_<trion>_<spin>`: free-space trion decay γ_r split over
      the two legs of each trion by μ²/Σμ² (equally for a dark trion).
    * `spin_dephasing`: σ_z of the ground doublet at γ_s/2, so the ground
      coherence decays at γ_s.
    * `spin_flip_down` and `spin_flip_up`: co-tunneling at Γ_ct each.
    * `trion_dephasing`: projector on the trions at the trion dephasing
      rate.

    Channels with zero rate are omitted.
    """
    channels = [CollapseChannel('cavity', space.destroy(), params.kappa)]

    for trion in ('T1', 'T2'):
        moments = {
            spin: params.dipoles.moment(trion, spin)  # type: ignore[arg-type]
            for spin in ('up', 'down')
        }
        total = sum(m**2 for m in moments.values())
        for spin, moment in moments.items():
            weight = 0.5 if total == 0 else moment**2 / total
            channels.append(
                CollapseChannel(
                    f'radiative_{trion}_{spin}',
                    space.qd_transition(spin, trion),
                    params.radiative_rate * weight,
                ),
            )

    sigma_z = space.projector('up') - space.projector('down')
    channels.append(
        CollapseChannel(
            'spin_dephasing',
            sigma_z,
            params.spin_dephasing_rate / 2,
        ),
    )
    channels.append(
        CollapseChannel(
            'spin_flip_down',
            space.qd_transition('down', 'up'),
            params.spin_flip_rate,
        ),
    )
    channels.append(
        CollapseChannel(
            'spin_flip_up',
            space.qd_transition('up', 'down'),
            params.spin_flip_rate,
        ),
    )
    channels.append(
        CollapseChannel(
            'trion_dephasing',
            space.projector('T1') + space.projector('T2'),
            params.trion_dephasing_rate,
        ),
    )
    return tuple(channel for channel in channels if channel.rate > 0)
