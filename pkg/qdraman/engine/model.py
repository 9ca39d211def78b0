"""Lindblad model of the driven dot-cavity system."""

from __future__ import annotations

import dataclasses
import functools
import logging
import math

import numpy

from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.engine.calibrate import resolve_coupling
from qdraman.engine.hilbert import dissipator
from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.hilbert import spost
from qdraman.engine.hilbert import spre
from qdraman.engine.operators import collapse_channels
from qdraman.engine.operators import CollapseChannel
from qdraman.engine.operators import hamiltonian
from qdraman.exceptions import ParameterError

__all__ = ('CollapseChannel', 'LindbladModel', 'build_model')

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian and dissipative channels of one operating point.

    Attributes:
        space: Dot and truncated cavity Hilbert space.
        params: Device parameters the model was built from.
        levels: Level structure of `params`.
        laser_energy: Laser energy ω_L, the frame frequency (μeV).
        coupling: Dot-cavity coupling g_c used in the Hamiltonian (μeV).
        hamiltonian: Rotating-frame Hamiltonian (μeV).
        channels: Collapse channels.
    """

    space: HilbertSpace
    params: DeviceParameters
    levels: LevelStructure
    laser_energy: float
    coupling: float
    hamiltonian: numpy.ndarray
    channels: tuple[CollapseChannel, ...]

    def __post_init__(self) -> None:
        dim = self.space.total_dim
        if self.hamiltonian.shape != (dim, dim):
            raise ValueError(
                f'Hamiltonian has shape {self.hamiltonian.shape} but the '
                f'Hilbert space has dimension {dim}.',
            )
        scale = max(float(numpy.linalg.norm(self.hamiltonian)), 1.0)
        skew = numpy.linalg.norm(self.hamiltonian - self.hamiltonian.conj().T)
        if skew > 1e-12 * scale:
            raise ValueError(f'Hamiltonian is not Hermitian ({skew:.2e}).')
        for channel in self.channels:
            if channel.operator.shape != (dim, dim):
                raise ValueError(
                    f'Operator of channel {channel.name!r} has shape '
                    f'{channel.operator.shape}.',
                )
            if not (math.isfinite(channel.rate) and channel.rate >= 0):
                raise ValueError(
                    f'Rate of channel {channel.name!r} must be finite and '
                    f'non-negative but got {channel.rate}.',
                )

    @property
    def kappa(self) -> float:
        """Cavity energy decay rate (μeV)."""
        return self.params.kappa

    @functools.cached_property
    def liouvillian(self) -> numpy.ndarray:
        """Generator of d vec(ρ)/dt in the column-stacked basis."""
        h = self.hamiltonian
        superop = -1j * (spre(h) - spost(h))
        for channel in self.channels:
            superop = superop + channel.rate * dissipator(channel.operator)
        return superop

    def channel_rate(self, name: str) -> float:
        """Total rate of the channels called `name` (0 if absent)."""
        return sum(c.rate for c in self.channels if c.name == name)

    def with_channels(self, *channels: CollapseChannel) -> LindbladModel:
        """Copy of the model with extra collapse channels."""
        return dataclasses.replace(
            self,
            channels=self.channels + tuple(channels),
        )

    def report(self) -> str:
        """Human readable summary of the model."""
        dim = self.space.total_dim
        lines = [
            f'hilbert dimension: {dim} (fock cutoff {self.space.fock_cutoff})',
            f'liouvillian dimension: {dim**2}',
            f'laser energy: {self.laser_energy:.3f} ueV',
            f'dot-cavity coupling: {self.coupling:.4f} ueV',
            f'kappa: {self.kappa:.3f} ueV',
        ]
        lines.extend(
            f'channel {c.name}: {c.rate:.6g} ueV' for c in self.channels
        )
        return '\n'.join(lines)


def build_model(
    params: DeviceParameters,
    levels: LevelStructure,
    laser_energy: float,
    fock_cutoff: int = 2,
    *,
    coupling: float | None = None,
) -> LindbladModel:
    """Build the Lindblad model of one operating point.

    Args:
        params: Device parameters.
        levels: Level structure of `params`.
        laser_energy: Laser energy ω_L (μeV).
        fock_cutoff: Highest cavity photon number.
        coupling: Dot-cavity coupling overriding the configured or
            calibrated value.

    Returns:
        Lindblad model in the frame rotating at `laser_energy`.

    Raises:
        ParameterError: If `fock_cutoff` is below 1.
    """
    if fock_cutoff < 1:
        raise ParameterError(
            'fock_cutoff',
            f'fock_cutoff must be at least 1 but got {fock_cutoff}.',
        )
    space = HilbertSpace(fock_cutoff)
    if coupling is None:
        coupling = resolve_coupling(params, levels, fock_cutoff)
    h = hamiltonian(space, params, levels, laser_energy, coupling)
    model = LindbladModel(
        space=space,
        params=params,
        levels=levels,
        laser_energy=laser_energy,
        coupling=coupling,
        hamiltonian=h,
        channels=collapse_channels(space, params),
    )
    logger.debug(
        f'Built model at laser {laser_energy:.3f} ueV with '
        f'{len(model.channels)} channels',
    )
    return model
