"""Cavity emission spectrum and intensity correlations.

Both use the quantum regression theorem on the stationary state. The
spectrum is the Fourier transform of <a†(τ) a(0)>, evaluated through the
resolvent of the Liouvillian; g2(τ) propagates the state conditioned on a
photon detection.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy
import scipy.linalg

from qdraman.engine.hilbert import trace_functional
from qdraman.engine.hilbert import vec
from qdraman.engine.model import LindbladModel
from qdraman.engine.solvers import DensityMatrix
from qdraman.engine.solvers import evolve
from qdraman.engine.solvers import steady_state
from qdraman.exceptions import CorrelationError
from qdraman.spectrum import CorrelationTrace
from qdraman.spectrum import Spectrum
from qdraman.spectrum import uniform_grid

logger = logging.getLogger(__name__)

SOLVE_BUDGET = 4_000_000
"""Matrix elements per batch of direct resolvent solves."""


class EmissionSpectrumSolver:
    """Emission spectrum of one model on arbitrary grids.

    The incoherent part is S(ω) = (κ/π) Re Tr[a† (i δ + M)⁻¹ x] with
    δ = ω - ω_L, x = a ρ - <a> ρ and M = -L + vec(ρ) Tr, which is
    invertible and acts as -L on traceless operators. M is diagonalized
    once so every grid point costs O(d²). The decomposition is
    spot-checked against direct solves and dropped if it is inaccurate.

    Args:
        model: Lindblad model.
        steady: Stationary state; computed when omitted.
        check_tol: Accepted relative deviation of the decomposition.
    """

    def __init__(
        self,
        model: LindbladModel,
        steady: DensityMatrix | None = None,
        *,
        check_tol: float = 1e-6,
    ) -> None:
        self.model = model
        self.steady = steady_state(model) if steady is None else steady
        self.check_tol = check_tol

        dim = model.space.total_dim
        rho = numpy.asarray(self.steady.matrix)
        a = model.space.destroy()
        self.coherent_amplitude = complex(numpy.trace(a @ rho))
        source = a @ rho - self.coherent_amplitude * rho

        self._generator = -model.liouvillian + numpy.outer(
            vec(rho),
            trace_functional(dim),
        )
        self._source = vec(source)
        self._readout = vec(a.conj())
        self._modes = self._decompose()

    def _decompose(self) -> tuple[numpy.ndarray, numpy.ndarray] | None:
        eigenvalues, right = scipy.linalg.eig(self._generator)
        try:
            coefficients = scipy.linalg.solve(right, self._source)
        except (numpy.linalg.LinAlgError, ValueError):
            logger.debug('Generator is defective; using direct solves')
            return None
        return eigenvalues, (self._readout @ right) * coefficients

    def _direct(self, deltas: numpy.ndarray) -> numpy.ndarray:
        dim = self._generator.shape[0]
        chunk = max(1, SOLVE_BUDGET // (dim * dim))
        identity = numpy.eye(dim)
        out = numpy.empty(deltas.size, dtype=complex)
        for start in range(0, deltas.size, chunk):
            part = deltas[start : start + chunk]
            matrices = (
                1j * part[:, None, None] * identity + self._generator[None]
            )
            rhs = numpy.broadcast_to(
                self._source[:, None],
                (part.size, dim, 1),
            )
            solutions = numpy.linalg.solve(matrices, rhs)[..., 0]
            out[start : start + part.size] = solutions @ self._readout
        return out

    def resolvent(self, deltas: numpy.ndarray) -> numpy.ndarray:
        """Tr[a† (i δ + M)⁻¹ x] at laser detunings `deltas`."""
        deltas = numpy.asarray(deltas, dtype=float)
        if self._modes is None:
            return self._direct(deltas)

        eigenvalues, weights = self._modes
        values = (
            weights[None, :] / (1j * deltas[:, None] + eigenvalues[None, :])
        ).sum(axis=1)

        strongest = int(numpy.argmax(numpy.abs(values)))
        checks = sorted({0, deltas.size // 2, deltas.size - 1, strongest})
        reference = self._direct(deltas[checks])
        scale = float(numpy.max(numpy.abs(reference)))
        deviation = float(numpy.max(numpy.abs(values[checks] - reference)))
        if scale > 0 and deviation > self.check_tol * scale:
            logger.debug(
                f'Eigen-decomposition deviates by {deviation / scale:.2e}; '
                'falling back to direct solves',
            )
            self._modes = None
            return self._direct(deltas)
        return values

    def evaluate(self, grid: Sequence[float] | numpy.ndarray) -> Spectrum:
        """Emission spectrum on `grid` (μeV).

        The elastic component κ|<a>|² is added as a single bin at the grid
        point closest to the laser when the grid covers it. Round-off
        negatives are clipped to zero.
        """
        grid = numpy.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError('Spectrum grid must be a non-empty 1D array.')
        kappa = self.model.kappa
        laser = self.model.laser_energy

        values = kappa / math.pi * self.resolvent(grid - laser).real

        elastic = kappa * abs(self.coherent_amplitude) ** 2
        if elastic > 0 and grid.size > 1 and grid[0] <= laser <= grid[-1]:
            index = int(numpy.argmin(numpy.abs(grid - laser)))
            low = grid[max(index - 1, 0)]
            high = grid[min(index + 1, grid.size - 1)]
            width = (high - low) / (2 if 0 < index < grid.size - 1 else 1)
            values[index] += elastic / width

        lowest = float(values.min())
        if lowest < 0:
            peak = float(values.max())
            if peak > 0 and lowest < -1e-6 * peak:
                logger.warning(
                    f'Emission spectrum has negative values down to '
                    f'{lowest:.3e} (peak {peak:.3e}); clipping to zero',
                )
            values = numpy.clip(values, 0, None)
        return Spectrum(grid, values)


def emission_spectrum(
    model: LindbladModel,
    grid: Sequence[float] | numpy.ndarray | None = None,
    steady: DensityMatrix | None = None,
    *,
    step: float = 0.1,
    window: float = 30.0,
) -> Spectrum:
    """Cavity emission spectrum of a model.

    Args:
        model: Lindblad model.
        grid: Emission energies (μeV). Defaults to a uniform grid of
            spacing `step` around the laser covering both sidebands plus
            `window`.
        steady: Stationary state; computed when omitted.
        step: Default grid spacing (μeV).
        window: Margin beyond the sidebands of the default grid (μeV).

    Returns:
        Emission spectrum in photons per μeV per unit time.
    """
    if grid is None:
        splitting = model.levels.electron_zeeman
        grid = uniform_grid(model.laser_energy, splitting + window, step)
    return EmissionSpectrumSolver(model, steady).evaluate(grid)


def sideband_weights(
    spectrum: Spectrum,
    laser_energy: float,
    splitting: float,
    half_width: float,
) -> tuple[float, float]:
    """Integrated Stokes and anti-Stokes sideband powers.

    Args:
        spectrum: Emission spectrum.
        laser_energy: Laser energy ω_L (μeV).
        splitting: Ground-state splitting E_z_e (μeV).
        half_width: Half width of each integration window (μeV).

    Returns:
        Tuple `(stokes, antistokes)` integrated around ω_L ∓ E_z_e.
    """
    stokes_center = laser_energy - splitting
    antistokes_center = laser_energy + splitting
    stokes = spectrum.integrate(
        stokes_center - half_width,
        stokes_center + half_width,
    )
    antistokes = spectrum.integrate(
        antistokes_center - half_width,
        antistokes_center + half_width,
    )
    return stokes, antistokes


def g2(
    model: LindbladModel,
    delays: Sequence[float] | numpy.ndarray,
    steady: DensityMatrix | None = None,
) -> CorrelationTrace:
    """Second-order intensity correlation of the cavity output.

    g2(τ) = Tr[a†a ρ_c(τ)] / <a†a>, where ρ_c(0) = a ρ a† / <a†a> is
    the state right after a detection, propagated under the model.

    Args:
        model: Lindblad model.
        delays: Non-negative, strictly increasing delays (ps).
        steady: Stationary state; computed when omitted.

    Returns:
        Normalized correlation trace; its `normalization` is the emitted
        photon flux κ<a†a>.

    Raises:
        CorrelationError: If the cavity is empty in the steady state.
    """
    steady = steady_state(model) if steady is None else steady
    space = model.space
    a = space.destroy()
    number = space.number()
    rho = numpy.asarray(steady.matrix)
    photons = float(numpy.trace(number @ rho).real)
    if not photons > 0:
        raise CorrelationError(
            'Mean cavity photon number is zero so g2 is undefined.',
        )

    conditioned = a @ rho @ a.conj().T / photons
    conditioned = conditioned / numpy.trace(conditioned)
    states = evolve(
        model,
        DensityMatrix(conditioned, space, trace_tol=1e-9),
        delays,
        method='propagator',
    )
    values = numpy.array(
        [state.expect(number).real / photons for state in states],
    )
    return CorrelationTrace(
        numpy.asarray(delays, dtype=float),
        numpy.clip(values, 0, None),
        normalization=model.kappa * photons,
    )

