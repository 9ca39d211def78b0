"""Device parameters and the optical level structure.

The charged dot has a spin doublet in the ground state and a trion doublet
in the excited state. Each trion connects to both ground states, forming
two Λ systems:

* Stokes: up -> T2 -> down, laser on the up-T2 leg, emission on down-T2.
* Anti-Stokes: down -> T1 -> up, laser on the down-T1 leg, emission on
  up-T1.

The outer (cross-polarized) legs are driven by the laser and the inner
(cavity-coupled) legs emit into the cavity mode.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Any
from typing import Literal
from typing import NamedTuple
from typing import Optional

from qdraman.exceptions import ParameterError
from qdraman.units import H_PLANCK
from qdraman.units import HBAR
from qdraman.units import zeeman_splitting

logger = logging.getLogger(__name__)

Spin = Literal['up', 'down']
Trion = Literal['T1', 'T2']
Role = Literal['cavity', 'cross']

BASE_T1 = 2.0e7
"""Spin T1 (ps) in the plateau center at 5.2 K."""
PLATEAU_EDGE_FACTOR = 1000.0
"""Speed-up of co-tunneling spin flips at the charge-plateau edge."""
PLATEAU_CENTER_RATE = HBAR / (2 * BASE_T1)
"""Per-direction spin-flip rate (μeV) giving a population T1 of BASE_T1."""
PLATEAU_EDGE_RATE = PLATEAU_EDGE_FACTOR * PLATEAU_CENTER_RATE
"""Per-direction spin-flip rate (μeV) at the plateau edge."""

DEFAULT_CAVITY_HWHM = 175.0
"""Measured cavity half width (μeV), used when neither width nor Q is set."""
Q_REJECT_MISMATCH = 0.15
Q_WARN_MISMATCH = 0.01


class Dipoles(NamedTuple):
    """Relative transition dipole moments of the four optical legs."""

    t1_up: float = 1.0
    t1_down: float = 1.0
    t2_up: float = 1.0
    t2_down: float = 1.0

    def moment(self, trion: Trion, ground: Spin) -> float:
        """Dipole moment of the leg between `trion` and `ground`."""
        return getattr(self, f'{trion.lower()}_{ground}')

    def normalized(self) -> Dipoles:
        """Scale the moments so the largest magnitude is 1.

        All-zero moments describe a dark emitter and are returned as is.
        """
        largest = max(abs(m) for m in self)
        if largest == 0:
            return Dipoles(*(float(m) for m in self))
        return Dipoles(*(float(m) / largest for m in self))


def cavity_fwhm_from_q(cavity_energy: float, q: float) -> float:
    """Cavity full width at half maximum from its quality factor.

    Args:
        cavity_energy: Cavity resonance (μeV).
        q: Quality factor. `math.inf` describes a lossless cavity.

    Returns:
        FWHM `ω_c / Q` in μeV.

    Raises:
        ValueError: If `q` is not positive.
    """
    if not q > 0:
        raise ValueError(f'Quality factor must be positive but got {q}.')
    return cavity_energy / q


@dataclasses.dataclass(frozen=True)
class DeviceParameters:
    """Physical parameters of the coupled spin-cavity device.

    All energies, widths and rates are in μeV. Defaults reproduce the
    measured device: a dot centered at 1291.2 meV, a cavity at 1290.7 meV
    with a 350 μeV linewidth, and a 4 T Voigt field.

    Attributes:
        qd_center_energy: Centroid E_X of the four trion transitions.
        cavity_energy: Cavity resonance ω_c.
        cavity_hwhm: Cavity half width Γ. When `None` it is derived
            from `cavity_q`, or set to the measured 175 μeV if `cavity_q`
            is also `None`.
        cavity_q: Optional quality factor, an alternative to
            `cavity_hwhm`. When both are given the measured width wins
            and a mismatch above 1% is logged; above 15% the pair is
            rejected.
        electron_g: Electron g-factor g_e.
        trion_g: Trion (hole) g-factor g_t.
        qd_hwhm: Half width γ of the cavity-broadened optical transitions.
        spin_dephasing_rate: γ_s, half width of the Raman sidebands.
        spin_flip_rate: Co-tunneling flip rate Γ_ct in each direction.
        radiative_rate: Free-space trion decay rate γ_r.
        qd_cavity_coupling: Coupling g_c. When `None` the engine
            calibrates it so the transitions have FWHM 2γ.
        drive_rabi: Laser Rabi energy Ω.
        polarization_mixing_angle: Misalignment θ (rad) of the transition
            dipoles from the cavity axis.
        magnetic_field: Field B (T).
        trion_dephasing_rate: Optional pure dephasing of the trions.
        dipoles: Relative dipole moments, normalized to a maximum of 1.
        transition_numbering: `'ascending'` numbers the transitions from
            the lowest energy, so transition 1 drives the anti-Stokes
            process and transition 4 the Stokes process. `'descending'`
            numbers them from the highest energy.
    """

    qd_center_energy: float = 1_291_200.0
    cavity_energy: float = 1_290_700.0
    cavity_hwhm: Optional[float] = None  # noqa: UP007
    cavity_q: Optional[float] = None  # noqa: UP007
    electron_g: float = 0.43
    trion_g: float = 0.21
    qd_hwhm: float = 9.0
    spin_dephasing_rate: float = 1.5
    spin_flip_rate: float = PLATEAU_EDGE_RATE
    radiative_rate: float = H_PLANCK * 1.0
    qd_cavity_coupling: Optional[float] = None  # noqa: UP007
    drive_rabi: float = 1.0
    polarization_mixing_angle: float = 0.0
    magnetic_field: float = 4.0
    trion_dephasing_rate: float = 0.0
    dipoles: Dipoles = Dipoles()
    transition_numbering: Literal['descending', 'ascending'] = 'ascending'

    def __post_init__(self) -> None:
        for name in (
            'qd_center_energy',
            'cavity_energy',
            'spin_dephasing_rate',
            'spin_flip_rate',
            'radiative_rate',
            'drive_rabi',
            'magnetic_field',
            'trion_dephasing_rate',
        ):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(
                    name,
                    f'{name} must be finite and non-negative but got {value}.',
                )
        if not (math.isfinite(self.qd_hwhm) and self.qd_hwhm > 0):
            raise ParameterError(
                'qd_hwhm',
                f'qd_hwhm must be positive but got {self.qd_hwhm}.',
            )
        if self.qd_cavity_coupling is not None and not (
            math.isfinite(self.qd_cavity_coupling)
            and self.qd_cavity_coupling >= 0
        ):
            raise ParameterError(
                'qd_cavity_coupling',
                'qd_cavity_coupling must be non-negative but got '
                f'{self.qd_cavity_coupling}.',
            )
        if self.transition_numbering not in ('descending', 'ascending'):
            raise ParameterError(
                'transition_numbering',
                "transition_numbering must be 'descending' or 'ascending' "
                f'but got {self.transition_numbering!r}.',
            )
        if any(m < 0 for m in self.dipoles):
            raise ParameterError(
                'dipoles',
                f'Dipole moments must be non-negative but got {self.dipoles}.',
            )
        dipoles = Dipoles(*self.dipoles).normalized()
        object.__setattr__(self, 'dipoles', dipoles)
        object.__setattr__(self, 'cavity_hwhm', self._resolve_cavity_hwhm())

    def _resolve_cavity_hwhm(self) -> float:
        if self.cavity_q is not None and not self.cavity_q > 0:
            raise ParameterError(
                'cavity_q',
                f'cavity_q must be positive but got {self.cavity_q}.',
            )
        if self.cavity_hwhm is None:
            if self.cavity_q is None:
                return DEFAULT_CAVITY_HWHM
            return cavity_fwhm_from_q(self.cavity_energy, self.cavity_q) / 2

        if not (math.isfinite(self.cavity_hwhm) and self.cavity_hwhm > 0):
            raise ParameterError(
                'cavity_hwhm',
                f'cavity_hwhm must be positive but got {self.cavity_hwhm}.',
            )
        if self.cavity_q is not None:
            measured = 2 * self.cavity_hwhm
            from_q = cavity_fwhm_from_q(self.cavity_energy, self.cavity_q)
            mismatch = abs(measured - from_q) / measured
            if mismatch > Q_REJECT_MISMATCH:
                raise ParameterError(
                    'cavity_q',
                    f'Cavity FWHM from Q ({from_q:.1f} ueV) differs from '
                    f'2 * cavity_hwhm ({measured:.1f} ueV) by '
                    f'{mismatch:.1%}, more than the accepted '
                    f'{Q_REJECT_MISMATCH:.0%}.',
                )
            if mismatch > Q_WARN_MISMATCH:
                logger.warning(
                    f'Cavity FWHM from Q ({from_q:.1f} ueV) differs from '
                    f'2 * cavity_hwhm ({measured:.1f} ueV) by '
                    f'{mismatch:.1%}; using the measured linewidth.',
                )
        return float(self.cavity_hwhm)

    @property
    def kappa(self) -> float:
        """Cavity energy decay rate κ = 2Γ (μeV)."""
        assert self.cavity_hwhm is not None
        return 2 * self.cavity_hwhm

    def replace(self, **changes: Any) -> DeviceParameters:
        """Return a validated copy with `changes` applied.

        Changing only one of `cavity_hwhm` and `cavity_q` drops the other,
        so the new value defines the cavity width on its own.
        """
        if 'cavity_q' in changes and 'cavity_hwhm' not in changes:
            changes['cavity_hwhm'] = None
        elif 'cavity_hwhm' in changes and 'cavity_q' not in changes:
            changes['cavity_q'] = None
        return dataclasses.replace(self, **changes)


class Transition(NamedTuple):
    """One optical leg of the level structure."""

    number: int
    """Transition label 1-4."""
    ground: Spin
    """Ground spin state of the leg."""
    trion: Trion
    """Trion state of the leg."""
    energy: float
    """Transition energy (μeV)."""
    role: Role
    """`'cavity'` for cavity-coupled legs, `'cross'` for driven legs."""


class LevelStructure(NamedTuple):
    """Level energies and optical transitions at a given field."""

    electron_zeeman: float
    """Ground-state splitting E_z_e (μeV)."""
    trion_zeeman: float
    """Trion splitting E_z_t (μeV)."""
    ground_energies: tuple[float, float]
    """Energies of (down, up) relative to the ground centroid (μeV)."""
    trion_energies: tuple[float, float]
    """Absolute energies of (T1, T2) (μeV)."""
    transition_energies: tuple[float, float, float, float]
    """Energies of transitions 1-4 (μeV)."""
    cavity_coupled_legs: tuple[int, int]
    """Numbers of the cavity-coupled transitions."""
    cross_polarized_legs: tuple[int, int]
    """Numbers of the cross-polarized (driven) transitions."""
    transitions: tuple[Transition, Transition, Transition, Transition]
    """Transitions 1-4."""

    def transition(self, number: int) -> Transition:
        """Look up a transition by its number."""
        if number not in (1, 2, 3, 4):
            raise ValueError(
                f'Transition number must be 1-4 but got {number}.',
            )
        return self.transitions[number - 1]

    def leg(self, trion: Trion, ground: Spin) -> Transition:
        """Look up the transition between `trion` and `ground`."""
        for transition in self.transitions:
            if transition.trion == trion and transition.ground == ground:
                return transition
        raise ValueError(f'No transition between {trion} and {ground}.')

    @property
    def stokes_pump(self) -> Transition:
        """Driven leg of the Stokes Λ system (up -> T2)."""
        return self.leg('T2', 'up')

    @property
    def stokes_emission(self) -> Transition:
        """Emitting leg of the Stokes Λ system (T2 -> down)."""
        return self.leg('T2', 'down')

    @property
    def antistokes_pump(self) -> Transition:
        """Driven leg of the anti-Stokes Λ system (down -> T1)."""
        return self.leg('T1', 'down')

    @property
    def antistokes_emission(self) -> Transition:
        """Emitting leg of the anti-Stokes Λ system (T1 -> up)."""
        return self.leg('T1', 'up')


def build_level_structure(params: DeviceParameters) -> LevelStructure:
    """Compute the level structure of a device.

    Args:
        params: Device parameters.

    Returns:
        Zeeman splittings, level energies and the four transitions with
        their cavity-coupled or cross-polarized roles.
    """
    e_z_e = zeeman_splitting(params.electron_g, params.magnetic_field)
    e_z_t = zeeman_splitting(params.trion_g, params.magnetic_field)
    ground = {'down': e_z_e / 2, 'up': -e_z_e / 2}
    trion = {
        'T1': params.qd_center_energy - e_z_t / 2,
        'T2': params.qd_center_energy + e_z_t / 2,
    }

    # Lowest to highest energy.
    legs: list[tuple[Trion, Spin, Role]] = [
        ('T1', 'down', 'cross'),
        ('T2', 'down', 'cavity'),
        ('T1', 'up', 'cavity'),
        ('T2', 'up', 'cross'),
    ]
    if params.transition_numbering == 'descending':
        legs.reverse()

    transitions = tuple(
        Transition(
            number=index + 1,
            ground=spin,
            trion=trion_name,
            energy=trion[trion_name] - ground[spin],
            role=role,
        )
        for index, (trion_name, spin, role) in enumerate(legs)
    )
    assert len(transitions) == 4

    return LevelStructure(
        electron_zeeman=e_z_e,
        trion_zeeman=e_z_t,
        ground_energies=(ground['down'], ground['up']),
        trion_energies=(trion['T1'], trion['T2']),
        transition_energies=(
            transitions[0].energy,
            transitions[1].energy,
            transitions[2].energy,
            transitions[3].energy,
        ),
        cavity_coupled_legs=(2, 3),
        cross_polarized_legs=(1, 4),
        transitions=transitions,  # type: ignore[arg-type]
    )
