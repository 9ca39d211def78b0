"""Least-squares fits of spectra and correlation traces."""

from __future__ import annotations

import logging
from collections.abc import Callable
from collections.abc import Sequence
from typing import NamedTuple

import numpy
import scipy.optimize

from qdraman.exceptions import FitError
from qdraman.instrument import g2_rise_model
from qdraman.spectrum import CorrelationTrace
from qdraman.spectrum import Spectrum

logger = logging.getLogger(__name__)

TOLERANCE = 1e-10
CORE_SIGMA_TO_FWHM = 3.826
"""FWHM over the second-moment width of a Lorentzian cut at half maximum."""
MIN_SPAN_RISE_TIMES = 5


class FitResult(NamedTuple):
    """Best-fit parameters of a model."""

    model: str
    """Name of the fitted model."""
    params: dict[str, float]
    """Best-fit values by parameter name."""
    sigmas: dict[str, float]
    """One standard deviation uncertainties by parameter name."""
    residual_norm: float
    """Euclidean norm of the final residuals."""

    def report(self) -> str:
        """Plain-text report of the fit."""
        lines = [f'model: {self.model}']
        lines.extend(
            f'  {name} = {value:.8g} +/- {self.sigmas[name]:.3g}'
            for name, value in self.params.items()
        )
        lines.append(f'  residual norm = {self.residual_norm:.4g}')
        return '\n'.join(lines)

    def rows(self) -> list[tuple[str, str, float, float]]:
        """`(model, param, value, sigma)` rows for CSV export."""
        return [
            (self.model, name, value, self.sigmas[name])
            for name, value in self.params.items()
        ]


def lorentzian(
    x: numpy.ndarray,
    amplitude: float,
    center: float,
    fwhm: float,
    baseline: float = 0.0,
) -> numpy.ndarray:
    """Lorentzian of peak height `amplitude` on a constant baseline."""
    half = fwhm / 2
    return baseline + amplitude * half**2 / ((x - center) ** 2 + half**2)


def cavity_raman_model(
    x: numpy.ndarray,
    amplitude: float,
    qd_center: float,
    qd_fwhm: float,
    cavity_center: float,
    cavity_fwhm: float,
    shift: float,
) -> numpy.ndarray:
    """Dot resonance times the cavity resonance seen at `x + shift`."""
    return amplitude * lorentzian(x, 1.0, qd_center, qd_fwhm) * lorentzian(
        x + shift,
        1.0,
        cavity_center,
        cavity_fwhm,
    )


def _as_data(
    x: Sequence[float] | numpy.ndarray,
    y: Sequence[float] | numpy.ndarray,
) -> tuple[numpy.ndarray, numpy.ndarray]:
    x = numpy.asarray(x, dtype=float)
    y = numpy.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(
            f'Fit data must be 1D arrays of equal length but got shapes '
            f'{x.shape} and {y.shape}.',
        )
    if not (numpy.all(numpy.isfinite(x)) and numpy.all(numpy.isfinite(y))):
        raise ValueError('Fit data must be finite.')
    return x, y


def _least_squares(
    name: str,
    model: Callable[..., numpy.ndarray],
    x: numpy.ndarray,
    y: numpy.ndarray,
    names: Sequence[str],
    seed: Sequence[float],
    scales: Sequence[float],
    offsets: Sequence[float] | None = None,
) -> FitResult:
    # Parameters are fitted as q = (p - offset) / scale so all are O(1).
    scales_ = numpy.asarray(scales, dtype=float)
    offsets_ = (
        numpy.zeros(len(names)) if offsets is None else numpy.asarray(offsets)
    )
    y_scale = float(numpy.max(numpy.abs(y))) or 1.0
    m, n = y.size, len(names)
    if m <= n:
        raise FitError(
            f'Fitting {name} needs more than {n} samples but got {m}.',
            residual_norm=float('nan'),
        )

    def residuals(q: numpy.ndarray) -> numpy.ndarray:
        return (model(x, *(offsets_ + q * scales_)) - y) / y_scale

    q0 = (numpy.asarray(seed, dtype=float) - offsets_) / scales_
    result = scipy.optimize.least_squares(
        residuals,
        q0,
        method='lm',
        max_nfev=200 * (n + 1),
        xtol=TOLERANCE,
        ftol=TOLERANCE,
        gtol=TOLERANCE,
    )
    rss = float(numpy.sum(result.fun**2)) * y_scale**2
    residual_norm = float(numpy.sqrt(rss))
    logger.debug(
        f'Fit of {name}: status {result.status} after {result.nfev} '
        f'evaluations, residual norm {residual_norm:.4g}',
    )
    if not result.success:
        raise FitError(
            f'Fit of {name} did not converge: {result.message}',
            residual_norm=residual_norm,
        )

    params = offsets_ + result.x * scales_
    jacobian = result.jac * y_scale / scales_[None, :]
    covariance = numpy.linalg.pinv(jacobian.T @ jacobian) * rss / (m - n)
    sigmas = numpy.sqrt(numpy.abs(numpy.diag(covariance)))
    if not numpy.all(numpy.isfinite(numpy.concatenate([params, sigmas]))):
        raise FitError(
            f'Fit of {name} produced non-finite parameters.',
            residual_norm=residual_norm,
        )
    return FitResult(
        model=name,
        params={k: float(v) for k, v in zip(names, params)},
        sigmas={k: float(v) for k, v in zip(names, sigmas)},
        residual_norm=residual_norm,
    )


def _core_fwhm(x: numpy.ndarray, y: numpy.ndarray, baseline: float) -> float:
    signal = y - baseline
    core = signal >= signal.max() / 2
    weights = signal[core]
    center = numpy.sum(weights * x[core]) / numpy.sum(weights)
    sigma = numpy.sqrt(
        numpy.sum(weights * (x[core] - center) ** 2) / numpy.sum(weights),
    )
    if sigma == 0:
        return 2 * float(numpy.min(numpy.diff(x)))
    return CORE_SIGMA_TO_FWHM * float(sigma)


def fit_lorentzian(
    x: Spectrum | Sequence[float] | numpy.ndarray,
    y: Sequence[float] | numpy.ndarray | None = None,
) -> FitResult:
    """Fit a Lorentzian peak on a constant baseline.

    Seeds are the largest sample for the center, the smallest sample for
    the baseline and the second moment of the above-half-maximum core for
    the width.

    Args:
        x: Spectrum to fit, or increasing sample positions.
        y: Sample values when `x` holds positions; must be `None` when `x`
            is a spectrum.

    Returns:
        Fit of `amplitude`, `center`, `fwhm` and `baseline`.

    Raises:
        FitError: If the fit does not converge.
        ValueError: If the samples are missing, mismatched or not finite.
    """
    if isinstance(x, Spectrum):
        if y is not None:
            raise ValueError('Values must not be given with a spectrum.')
        x, y = x.grid, x.values
    elif y is None:
        raise ValueError('Values are required when fitting positions.')
    x, y = _as_data(x, y)
    baseline = float(y.min())
    amplitude = float(y.max()) - baseline
    center = float(x[numpy.argmax(y)])
    fwhm = _core_fwhm(x, y, baseline) if amplitude > 0 else 1.0
    scale = amplitude if amplitude > 0 else 1.0
    fit = _least_squares(
        'lorentzian',
        lorentzian,
        x,
        y,
        ('amplitude', 'center', 'fwhm', 'baseline'),
        (amplitude, center, fwhm, baseline),
        (scale, fwhm, fwhm, scale),
        (0.0, center, 0.0, 0.0),
    )
    # Only the squared half width enters the model.
    fit.params['fwhm'] = abs(fit.params['fwhm'])
    return fit


def fit_g2_rise(
    trace: CorrelationTrace,
    width: float,
    seed_rise: float | None = None,
) -> FitResult:
    """Fit a Gaussian-blurred exponential rise to a g2 trace.

    Args:
        trace: Correlation trace.
        width: Detector width Δt (ps) of the blur.
        seed_rise: Initial rise time (ps); read from the 1/e recovery of
            the trace by default.

    Returns:
        Fit of `t_rise` (ps) and `depth`.

    Raises:
        FitError: If the fit does not converge or the trace spans fewer
            than five rise times.
    """
    delays, values = _as_data(trace.delays, trace.values)
    lowest = float(values.min())
    depth = min(max(1.0 - lowest, 0.05), 1.0)
    if seed_rise is None:
        level = 1.0 - (1.0 - lowest) / numpy.e
        start = int(numpy.argmin(values))
        recovered = numpy.flatnonzero(values[start:] >= level)
        span = float(delays[-1] - delays[0])
        seed_rise = (
            float(delays[start + recovered[0]] - delays[start])
            if recovered.size
            else span / MIN_SPAN_RISE_TIMES
        )
        seed_rise = max(seed_rise, float(numpy.min(numpy.diff(delays))))

    def model(tau: numpy.ndarray, t_rise: float, dip: float) -> numpy.ndarray:
        return g2_rise_model(tau, abs(t_rise), width, dip)

    fit = _least_squares(
        'g2_rise',
        model,
        delays,
        values,
        ('t_rise', 'depth'),
        (seed_rise, depth),
        (seed_rise, 1.0),
    )
    t_rise = abs(fit.params['t_rise'])
    fit.params['t_rise'] = t_rise
    span = float(numpy.max(numpy.abs(delays)))
    if span < MIN_SPAN_RISE_TIMES * t_rise:
        raise FitError(
            f'Delay window of {span:.4g} ps is shorter than '
            f'{MIN_SPAN_RISE_TIMES} rise times ({t_rise:.4g} ps); the rise '
            'is not constrained.',
            residual_norm=fit.residual_norm,
        )
    return fit


def fit_cavity_raman(
    x: Sequence[float] | numpy.ndarray,
    y: Sequence[float] | numpy.ndarray,
    shift: float,
    *,
    cavity_center: float,
    cavity_fwhm: float,
) -> FitResult:
    """Fit a Raman excitation resonance filtered by the cavity.

    The model is a dot Lorentzian in the laser energy times the cavity
    Lorentzian evaluated at the emitted energy, laser plus `shift`.

    Args:
        x: Laser energies (μeV).
        y: Emitted intensities.
        shift: Known Raman shift of the emission (μeV), -E_z_e for Stokes
            and +E_z_e for anti-Stokes.
        cavity_center: Seed cavity resonance (μeV).
        cavity_fwhm: Seed cavity FWHM (μeV).

    Returns:
        Fit of `amplitude`, `qd_center`, `qd_fwhm`, `cavity_center` and
        `cavity_fwhm`.

    Raises:
        FitError: If the fit does not converge.
    """
    x, y = _as_data(x, y)
    filtered = lorentzian(x + shift, 1.0, cavity_center, cavity_fwhm)
    resonance = y / filtered
    qd_center = float(x[numpy.argmax(resonance)])
    qd_fwhm = _core_fwhm(x, resonance, 0.0)
    amplitude = float(resonance.max()) or 1.0

    def model(
        energy: numpy.ndarray,
        amp: float,
        qd_c: float,
        qd_w: float,
        cav_c: float,
        cav_w: float,
    ) -> numpy.ndarray:
        return cavity_raman_model(energy, amp, qd_c, qd_w, cav_c, cav_w, shift)

    fit = _least_squares(
        'cavity_raman',
        model,
        x,
        y,
        ('amplitude', 'qd_center', 'qd_fwhm', 'cavity_center', 'cavity_fwhm'),
        (amplitude, qd_center, qd_fwhm, cavity_center, cavity_fwhm),
        (amplitude, qd_fwhm, qd_fwhm, cavity_fwhm, cavity_fwhm),
        (0.0, qd_center, 0.0, cavity_center, 0.0),
    )
    for name in ('qd_fwhm', 'cavity_fwhm'):
        fit.params[name] = abs(fit.params[name])
    return fit
