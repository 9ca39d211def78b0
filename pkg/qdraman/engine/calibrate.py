"""Dressed transitions and calibration of the dot-cavity coupling.

Without drive the optical coherences evolve under the effective
non-Hermitian Hamiltonian H_eff = H - (i/2) Σ r C†C. Its eigenvalue on a
trion-like state gives the cavity-shifted energy and the Purcell-broadened
width of every transition out of that trion.
"""

from __future__ import annotations

import functools
import logging
import math
from typing import NamedTuple

import numpy
import scipy.linalg
import scipy.optimize

from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.operators import collapse_channels
from qdraman.engine.operators import hamiltonian
from qdraman.exceptions import CalibrationError

logger = logging.getLogger(__name__)

MAX_COUPLING = 1.0e5
"""Largest coupling (μeV) tried while bracketing a calibration."""


class DressedTransition(NamedTuple):
    """Optical transition renormalized by the cavity."""

    number: int
    """Transition number."""
    energy: float
    """Cavity-shifted transition energy (μeV)."""
    fwhm: float
    """Full width of the optical coherence (μeV)."""
    decay: float
    """Population decay rate of the trion (μeV)."""


def effective_hamiltonian(
    space: HilbertSpace,
    params: DeviceParameters,
    levels: LevelStructure,
    coupling: float,
    reference: float,
) -> numpy.ndarray:
    """Undriven non-Hermitian Hamiltonian rotating at `reference`."""
    h = hamiltonian(space, params, levels, reference, coupling, rabi=0.0)
    for channel in collapse_channels(space, params):
        op = channel.operator
        h = h - 0.5j * channel.rate * (op.conj().T @ op)
    return h


def _eigenvalue_of(
    eigenvalues: numpy.ndarray,
    eigenvectors: numpy.ndarray,
    ket: numpy.ndarray,
) -> complex:
    overlaps = numpy.abs(ket.conj() @ eigenvectors) ** 2
    return complex(eigenvalues[int(numpy.argmax(overlaps))])


def dressed_transition(
    params: DeviceParameters,
    levels: LevelStructure,
    number: int,
    coupling: float,
    fock_cutoff: int = 2,
) -> DressedTransition:
    """Cavity-dressed energy and width of one transition.

    Args:
        params: Device parameters.
        levels: Level structure of `params`.
        number: Transition number 1-4.
        coupling: Dot-cavity coupling g_c (μeV).
        fock_cutoff: Photon-number cutoff of the Hilbert space.

    Returns:
        Dressed transition of the leg `number`.
    """
    space = HilbertSpace(fock_cutoff)
    transition = levels.transition(number)
    reference = params.qd_center_energy
    h_eff = effective_hamiltonian(space, params, levels, coupling, reference)
    eigenvalues, eigenvectors = scipy.linalg.eig(h_eff)

    trion = _eigenvalue_of(
        eigenvalues,
        eigenvectors,
        space.basis(transition.trion, 0),
    )
    ground = _eigenvalue_of(
        eigenvalues,
        eigenvectors,
        space.basis(transition.ground, 0),
    )
    return DressedTransition(
        number=number,
        energy=reference + (trion - ground).real,
        fwhm=-2 * (trion.imag + ground.imag),
        decay=-2 * trion.imag - params.trion_dephasing_rate,
    )


def transition_linewidth(
    params: DeviceParameters,
    levels: LevelStructure,
    coupling: float,
    fock_cutoff: int = 2,
) -> float:
    """Mean FWHM of the two cross-polarized (laser-driven) transitions."""
    widths = [
        dressed_transition(params, levels, number, coupling, fock_cutoff).fwhm
        for number in levels.cross_polarized_legs
    ]
    return float(numpy.mean(widths))


@functools.lru_cache(maxsize=64)
def calibrate_coupling(
    params: DeviceParameters,
    levels: LevelStructure,
    target_fwhm: float,
    fock_cutoff: int = 2,
) -> float:
    """Find the coupling that broadens the transitions to `target_fwhm`.

    The Purcell-broadened width of the driven transitions grows
    monotonically with g_c in the weak-coupling regime; the root is
    bracketed by doubling and refined with Brent's method.

    Args:
        params: Device parameters (the configured coupling is ignored).
        levels: Level structure of `params`.
        target_fwhm: Desired transition FWHM (μeV).
        fock_cutoff: Photon-number cutoff of the Hilbert space.

    Returns:
        Coupling g_c (μeV); 0 when the natural width already matches.

    Raises:
        CalibrationError: If the target is below the natural width or
            cannot be reached.
    """
    natural = transition_linewidth(params, levels, 0.0, fock_cutoff)
    if math.isclose(target_fwhm, natural, rel_tol=1e-9, abs_tol=1e-12):
        return 0.0
    if target_fwhm < natural:
        raise CalibrationError(
            f'Target linewidth {target_fwhm:.6g} ueV is below the natural '
            f'linewidth {natural:.6g} ueV so no coupling can reach it.',
        )

    def residual(coupling: float) -> float:
        width = transition_linewidth(params, levels, coupling, fock_cutoff)
        return width - target_fwhm

    high = 10.0
    while residual(high) < 0:
        high *= 2
        if high > MAX_COUPLING:
            raise CalibrationError(
                f'Target linewidth {target_fwhm:.6g} ueV is not reached for '
                f'couplings up to {MAX_COUPLING:.0f} ueV.',
            )

    coupling = float(
        scipy.optimize.brentq(residual, 0.0, high, xtol=1e-10, rtol=1e-12),
    )
    logger.info(
        f'Calibrated dot-cavity coupling g_c = {coupling:.4f} ueV for a '
        f'{target_fwhm:.4g} ueV linewidth (natural {natural:.4g} ueV)',
    )
    return coupling


def resolve_coupling(
    params: DeviceParameters,
    levels: LevelStructure,
    fock_cutoff: int = 2,
) -> float:
    """Configured coupling, or the one calibrated to a FWHM of 2γ."""
    if params.qd_cavity_coupling is not None:
        return params.qd_cavity_coupling
    return calibrate_coupling(params, levels, 2 * params.qd_hwhm, fock_cutoff)
