"""Measurement chain: polarization optics, Fabry-Perot filter, detector.

The scanning Fabry-Perot is an ideal Airy filter with unit peak
transmission. The spectrometer and CCD stage only select one filter order
and are modeled by [`order_window()`][qdraman.instrument.order_window].
Photon correlations are blurred by a Gaussian detector response
exp(-τ²/Δt²).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Sequence

import numpy
import scipy.integrate
import scipy.ndimage
import scipy.special

from qdraman.spectrum import CorrelationTrace
from qdraman.spectrum import Spectrum

logger = logging.getLogger(__name__)

CAVITY_AXIS = 0.0
"""Polarization angle of the cavity mode and of the detection analyzer."""
LASER_AXIS = math.pi / 2
"""Polarization angle of the cross-polarized excitation laser."""


def linear_field(angle: float) -> numpy.ndarray:
    """Unit field vector of a linear polarization at `angle` (rad)."""
    field = numpy.array([math.cos(angle), math.sin(angle)])
    # Orthogonal axes must project to exactly zero.
    field[numpy.abs(field) < 1e-15] = 0.0
    return field


def polarization_project(
    field: Sequence[complex] | numpy.ndarray,
    analyzer_angle: float,
) -> float:
    """Project a field onto a linear analyzer (Malus's law).

    Args:
        field: Field components `(E_x, E_y)`; complex values describe
            elliptical polarization.
        analyzer_angle: Analyzer axis in `[0, π)` (rad).

    Returns:
        Transmitted intensity `|E_x cos(a) + E_y sin(a)|²`.

    Raises:
        ValueError: If the field is not two-dimensional or the angle lies
            outside `[0, π)`.
    """
    components = numpy.asarray(field, dtype=complex)
    if components.shape != (2,):
        raise ValueError(
            'Field must have two components but got shape '
            f'{components.shape}.',
        )
    if not 0 <= analyzer_angle < math.pi:
        raise ValueError(
            f'Analyzer angle must lie in [0, pi) but got {analyzer_angle}.',
        )
    cos_a = math.cos(analyzer_angle)
    sin_a = math.sin(analyzer_angle)
    amplitude = components[0] * cos_a + components[1] * sin_a
    return float(abs(amplitude) ** 2)


def leg_polarization(role: str, mixing_angle: float) -> float:
    """Polarization angle of a transition dipole.

    Cavity-coupled legs lie at the mixing angle θ from the cavity axis and
    cross-polarized legs are perpendicular to them.
    """
    angle = mixing_angle if role == 'cavity' else mixing_angle + math.pi / 2
    return angle % math.pi


def drive_factor(role: str, mixing_angle: float) -> float:
    """Intensity factor of a leg's coupling to the cross-polarized laser."""
    field = linear_field(leg_polarization(role, mixing_angle))
    return polarization_project(field, LASER_AXIS)


def cavity_factor(role: str, mixing_angle: float) -> float:
    """Intensity factor of a leg's coupling to the cavity polarization."""
    field = linear_field(leg_polarization(role, mixing_angle))
    return polarization_project(field, CAVITY_AXIS)


@dataclasses.dataclass(frozen=True)
class FabryPerotFilter:
    """Ideal scanning Fabry-Perot interferometer.

    Attributes:
        fwhm: Transmission linewidth (μeV).
        fsr: Free spectral range (μeV).
        center: Energy of one transmission order (μeV).
    """

    fwhm: float = 1.7
    fsr: float = 400.0
    center: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.fwhm < self.fsr:
            raise ValueError(
                'Fabry-Perot linewidth must satisfy 0 < fwhm < fsr but got '
                f'fwhm={self.fwhm} and fsr={self.fsr}.',
            )

    @property
    def finesse(self) -> float:
        """Ratio of free spectral range to linewidth."""
        return self.fsr / self.fwhm

    @property
    def coefficient(self) -> float:
        """Airy coefficient F, chosen so the orders have the given FWHM."""
        return 1 / math.sin(math.pi * self.fwhm / (2 * self.fsr)) ** 2

    def transmission(
        self,
        energy: float | numpy.ndarray,
    ) -> float | numpy.ndarray:
        """Airy transmission at `energy` (μeV)."""
        phase = numpy.pi * (numpy.asarray(energy) - self.center) / self.fsr
        return 1 / (1 + self.coefficient * numpy.sin(phase) ** 2)

    def moved(self, center: float) -> FabryPerotFilter:
        """Return the filter tuned to a new center."""
        return dataclasses.replace(self, center=center)


def _check_sampling(spectrum: Spectrum, fp: FabryPerotFilter) -> None:
    if len(spectrum) > 1:
        coarsest = float(numpy.max(numpy.diff(spectrum.grid)))
        if coarsest > fp.fwhm / 4:
            raise ValueError(
                f'Spectrum grid spacing {coarsest:.4g} ueV undersamples the '
                f'Fabry-Perot linewidth; spacing must be at most '
                f'{fp.fwhm / 4:.4g} ueV.',
            )


def fp_transmit(
    spectrum: Spectrum,
    fp: FabryPerotFilter,
    *,
    single_order: bool = False,
) -> Spectrum:
    """Pass a spectrum through the Fabry-Perot filter.

    Args:
        spectrum: Input spectrum.
        fp: Filter, tuned by its `center`.
        single_order: Acknowledge that the grid spans less than one free
            spectral range so only one order is represented.

    Returns:
        The spectrum multiplied by the periodic Airy transmission.

    Raises:
        ValueError: If the grid is coarser than a quarter of the filter
            linewidth, or spans less than one FSR without `single_order`.
    """
    _check_sampling(spectrum, fp)
    span = float(spectrum.grid[-1] - spectrum.grid[0])
    if not single_order and span < fp.fsr:
        raise ValueError(
            f'Spectrum spans {span:.4g} ueV, less than one free spectral '
            f'range ({fp.fsr} ueV). Pass single_order=True to accept a '
            'single transmission order.',
        )
    transmitted = spectrum.values * fp.transmission(spectrum.grid)
    return Spectrum(spectrum.grid, transmitted)


def fp_scan(
    spectrum: Spectrum,
    fp: FabryPerotFilter,
    centers: Sequence[float] | numpy.ndarray,
    *,
    single_order: bool = False,
) -> Spectrum:
    """Emulate a scanned Fabry-Perot trace.

    For each scan position the transmitted power is integrated over the
    input spectrum, as the detector behind the filter would record it.

    Args:
        spectrum: Input spectrum.
        fp: Filter whose center is swept.
        centers: Scan positions (μeV), strictly increasing.
        single_order: Forwarded to the span check of
            [`fp_transmit()`][qdraman.instrument.fp_transmit].

    Returns:
        Transmitted power per scan position.
    """
    centers = numpy.asarray(centers, dtype=float)
    powers = []
    for center in centers:
        transmitted = fp_transmit(
            spectrum,
            fp.moved(float(center)),
            single_order=single_order,
        )
        powers.append(
            scipy.integrate.trapezoid(transmitted.values, transmitted.grid),
        )
    return Spectrum(centers, numpy.clip(numpy.array(powers), 0, None))


def order_window(
    spectrum: Spectrum,
    center: float,
    width: float = 400.0,
) -> Spectrum:
    """Keep one filter order, as the spectrometer stage does.

    Args:
        spectrum: Input spectrum.
        center: Center of the selected order (μeV).
        width: Window width, one free spectral range by default (μeV).

    Returns:
        The spectrum with samples outside the window set to zero.
    """
    if width <= 0:
        raise ValueError(
            f'Order window width must be positive but got {width}.',
        )
    inside = numpy.abs(spectrum.grid - center) <= width / 2
    return Spectrum(spectrum.grid, numpy.where(inside, spectrum.values, 0.0))


@dataclasses.dataclass(frozen=True)
class DetectorResponse:
    """Gaussian timing response exp(-τ²/Δt²) of the correlation setup.

    Attributes:
        width: Gaussian width Δt (ps).
    """

    width: float = 400.0

    def __post_init__(self) -> None:
        if self.width < 0:
            raise ValueError(
                f'Detector width must be non-negative but got {self.width}.',
            )

    def kernel(self, delays: float | numpy.ndarray) -> float | numpy.ndarray:
        """Unit-area kernel evaluated at `delays` (ps)."""
        if self.width == 0:
            raise ValueError('A zero-width detector has no kernel function.')
        tau = numpy.asarray(delays, dtype=float)
        return numpy.exp(-((tau / self.width) ** 2)) / (
            self.width * math.sqrt(math.pi)
        )

    def discrete_kernel(self, step: float) -> numpy.ndarray:
        """Kernel sampled at multiples of `step`, normalized to unit sum."""
        half = int(math.ceil(5 * self.width / step))
        taps = numpy.asarray(self.kernel(step * numpy.arange(-half, half + 1)))
        return taps / taps.sum()


def convolve_g2(
    trace: CorrelationTrace,
    detector: DetectorResponse,
) -> CorrelationTrace:
    """Blur a correlation trace with the detector response.

    Traces sampled on non-negative delays must start at τ = 0; they are
    mirrored to negative delays (g² is even in τ) before convolving and the
    original delays are returned.

    Args:
        trace: Trace on a uniform delay grid.
        detector: Detector response.

    Returns:
        Convolved trace with the same delays and normalization.

    Raises:
        ValueError: If the grid is non-uniform, coarser than Δt/4, or
            non-negative without starting at zero.
    """
    if not trace.is_uniform:
        raise ValueError('Correlation delays must be uniformly spaced.')
    if detector.width == 0:
        return trace
    if len(trace) < 2:
        raise ValueError('Convolution needs at least two delay samples.')
    step = float(trace.delays[1] - trace.delays[0])
    if step > detector.width / 4:
        raise ValueError(
            f'Delay step {step:.4g} ps must be at most a quarter of the '
            f'detector width ({detector.width / 4:.4g} ps).',
        )

    values = trace.values
    mirrored = trace.delays[0] >= 0
    if mirrored:
        if not math.isclose(trace.delays[0], 0, abs_tol=1e-9 * step):
            raise ValueError(
                'Traces on non-negative delays must start at tau = 0 to be '
                'mirrored.',
            )
        values = numpy.concatenate([values[:0:-1], values])

    kernel = detector.discrete_kernel(step)
    blurred = scipy.ndimage.convolve1d(values, kernel, mode='nearest')
    if mirrored:
        blurred = blurred[len(trace) - 1 :]
    return CorrelationTrace(
        trace.delays,
        numpy.clip(blurred, 0, None),
        trace.normalization,
    )


def g2_rise_model(
    delays: float | numpy.ndarray,
    t_rise: float,
    width: float,
    depth: float = 1.0,
) -> numpy.ndarray:
    """Gaussian-blurred exponential rise 1 - depth·exp(-|τ|/t_rise).

    The convolution with exp(-τ²/Δt²)/(Δt√π) is evaluated in closed
    form with scaled complementary error functions so that neither branch
    overflows.

    Args:
        delays: Delays τ (ps).
        t_rise: Rise time (ps).
        width: Detector width Δt (ps); zero gives the unblurred model.
        depth: Depth of the dip at τ = 0 before blurring.

    Returns:
        Model values at `delays`.
    """
    tau = numpy.abs(numpy.atleast_1d(numpy.asarray(delays, dtype=float)))
    if t_rise <= 0:
        raise ValueError(f'Rise time must be positive but got {t_rise}.')
    if width == 0:
        return 1 - depth * numpy.exp(-tau / t_rise)

    a = width / t_rise
    gauss = numpy.exp(-((tau / width) ** 2))
    z_minus = a / 2 - tau / width
    z_plus = a / 2 + tau / width

    lower = numpy.empty_like(tau)
    positive = z_minus > 0
    lower[positive] = scipy.special.erfcx(z_minus[positive]) * gauss[positive]
    lower[~positive] = numpy.exp(a**2 / 4 - tau[~positive] / t_rise) * (
        scipy.special.erfc(z_minus[~positive])
    )
    upper = scipy.special.erfcx(z_plus) * gauss
    return 1 - depth * 0.5 * (lower + upper)
