"""Sampled spectra, correlation traces and their CSV files."""

from __future__ import annotations

import csv
import dataclasses
import math
import pathlib
from collections.abc import Iterable
from collections.abc import Sequence
from typing import Union

import numpy
import scipy.integrate

CellT = Union[str, float, int]

FLOAT_FORMAT = '{:.12e}'
"""Fixed float format of every emitted CSV cell."""


def _as_array(values: Iterable[float] | numpy.ndarray) -> numpy.ndarray:
    array = numpy.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class Spectrum:
    """Intensity sampled on a strictly increasing energy grid.

    Args:
        grid: Energy samples (μeV).
        values: Intensity per sample (relative units).
    """

    grid: numpy.ndarray
    values: numpy.ndarray

    def __post_init__(self) -> None:
        grid = _as_array(self.grid)
        values = _as_array(self.values)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError(
                'Spectrum grid and values must be 1D arrays of the same '
                f'length but got shapes {grid.shape} and {values.shape}.',
            )
        if len(grid) == 0:
            raise ValueError('Spectrum grid must not be empty.')
        if numpy.any(numpy.diff(grid) <= 0):
            raise ValueError('Spectrum grid must be strictly increasing.')
        if not numpy.all(numpy.isfinite(values)) or numpy.any(values < 0):
            raise ValueError('Spectrum values must be finite and >= 0.')
        object.__setattr__(self, 'grid', grid)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return len(self.grid)

    @property
    def grid_spacing(self) -> float:
        """Smallest spacing between neighboring samples (μeV)."""
        if len(self.grid) < 2:
            return 0.0
        return float(numpy.min(numpy.diff(self.grid)))

    @property
    def is_uniform(self) -> bool:
        """Whether the grid spacing is constant."""
        if len(self.grid) < 3:
            return True
        steps = numpy.diff(self.grid)
        return bool(numpy.allclose(steps, steps[0], rtol=1e-9, atol=0))

    def integrate(
        self,
        low: float | None = None,
        high: float | None = None,
    ) -> float:
        """Trapezoidal integral of the spectrum over `[low, high]`."""
        mask = numpy.ones(len(self.grid), dtype=bool)
        if low is not None:
            mask &= self.grid >= low
        if high is not None:
            mask &= self.grid <= high
        if mask.sum() < 2:
            return 0.0
        area = scipy.integrate.trapezoid(self.values[mask], self.grid[mask])
        return float(area)

    def window(self, low: float, high: float) -> Spectrum:
        """Restrict the spectrum to samples within `[low, high]`."""
        mask = (self.grid >= low) & (self.grid <= high)
        if not mask.any():
            raise ValueError(
                f'No spectrum samples within [{low}, {high}] ueV.',
            )
        return Spectrum(self.grid[mask], self.values[mask])

    def scaled(self, factor: float) -> Spectrum:
        """Multiply the intensities by a non-negative factor."""
        return Spectrum(self.grid, self.values * factor)

    def peak(self) -> tuple[float, float]:
        """Energy and intensity of the largest sample."""
        index = int(numpy.argmax(self.values))
        return float(self.grid[index]), float(self.values[index])


@dataclasses.dataclass(frozen=True, eq=False)
class CorrelationTrace:
    """Second-order correlation sampled on a delay grid.

    Args:
        delays: Delays τ (ps), strictly increasing.
        values: g²(τ) samples.
        normalization: Steady-state photon flux κ⟨a†a⟩ (μeV) used to
            normalize the trace, or `None` for synthetic traces.
    """

    delays: numpy.ndarray
    values: numpy.ndarray
    normalization: float | None = None

    def __post_init__(self) -> None:
        delays = _as_array(self.delays)
        values = _as_array(self.values)
        if delays.ndim != 1 or delays.shape != values.shape:
            raise ValueError(
                'Correlation delays and values must be 1D arrays of the '
                f'same length but got shapes {delays.shape} and '
                f'{values.shape}.',
            )
        if len(delays) == 0:
            raise ValueError('Correlation delays must not be empty.')
        if numpy.any(numpy.diff(delays) <= 0):
            raise ValueError('Correlation delays must be strictly increasing.')
        if not numpy.all(numpy.isfinite(values)) or numpy.any(values < 0):
            raise ValueError('Correlation values must be finite and >= 0.')
        object.__setattr__(self, 'delays', delays)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return len(self.delays)

    @property
    def is_uniform(self) -> bool:
        """Whether the delay spacing is constant."""
        if len(self.delays) < 3:
            return True
        steps = numpy.diff(self.delays)
        return bool(numpy.allclose(steps, steps[0], rtol=1e-9, atol=0))

    def at(self, delay: float) -> float:
        """Linearly interpolated value at `delay` (ps)."""
        return float(numpy.interp(delay, self.delays, self.values))


def format_cell(value: CellT) -> str:
    """Format a CSV cell, rejecting non-finite numbers."""
    if isinstance(value, str):
        return value
    number = float(value)
    if not math.isfinite(number):
        raise ValueError(f'Refusing to write non-finite value {value}.')
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return FLOAT_FORMAT.format(number)


def write_csv(
    path: pathlib.Path | str,
    header: Sequence[str],
    rows: Iterable[Sequence[CellT]],
    *,
    comment: str | None = None,
) -> pathlib.Path:
    """Write a UTF-8, LF-terminated CSV file.

    Args:
        path: Output file.
        header: Column names.
        rows: Row cells. Floats are written with a fixed format.
        comment: Optional first line, written as `# <comment>`.

    Returns:
        Path of the written file.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        if comment is not None:
            f.write(f'# {comment}\n')
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(cell) for cell in row])
    return path


def read_csv(
    path: pathlib.Path | str,
) -> tuple[str | None, list[str], list[list[str]]]:
    """Read a CSV file written by [`write_csv()`][qdraman.spectrum.write_csv].

    Returns:
        Tuple of the comment (without `# `, or `None`), the header, and the
        rows as strings.
    """
    with open(path, newline='', encoding='utf-8') as f:
        lines = f.read().split('\n')
    comment = None
    if lines and lines[0].startswith('# '):
        comment = lines.pop(0)[2:]
    rows = list(csv.reader(line for line in lines if line))
    return comment, rows[0], rows[1:]


def write_spectrum_csv(
    path: pathlib.Path | str,
    spectrum: Spectrum,
    *,
    comment: str | None = None,
) -> pathlib.Path:
    """Write a spectrum as `energy_ueV,intensity`."""
    return write_csv(
        path,
        ('energy_ueV', 'intensity'),
        zip(spectrum.grid, spectrum.values),
        comment=comment,
    )


def write_excitation_csv(
    path: pathlib.Path | str,
    stokes: Spectrum,
    antistokes: Spectrum,
) -> pathlib.Path:
    """Write paired excitation spectra as `laser_ueV,I_S,I_AS`."""
    if not numpy.array_equal(stokes.grid, antistokes.grid):
        raise ValueError('Excitation spectra must share one laser grid.')
    return write_csv(
        path,
        ('laser_ueV', 'I_S', 'I_AS'),
        zip(stokes.grid, stokes.values, antistokes.values),
    )


def write_trace_csv(
    path: pathlib.Path | str,
    trace: CorrelationTrace,
) -> pathlib.Path:
    """Write a correlation trace as `tau_ps,g2`."""
    return write_csv(path, ('tau_ps', 'g2'), zip(trace.delays, trace.values))


def uniform_grid(
    center: float,
    half_width: float,
    step: float,
) -> numpy.ndarray:
    """Uniform grid of spacing `step` covering `center ± half_width`."""
    if step <= 0 or half_width < 0:
        raise ValueError(
            'Grid step must be positive and half width non-negative but got '
            f'step={step} and half_width={half_width}.',
        )
    count = int(round(2 * half_width / step)) + 1
    return center - half_width + step * numpy.arange(count)
