from __future__ import annotations

import math
import pathlib

import numpy
import pytest

from qdraman.spectrum import CorrelationTrace
from qdraman.spectrum import format_cell
from qdraman.spectrum import read_csv
from qdraman.spectrum import Spectrum
from qdraman.spectrum import uniform_grid
from qdraman.spectrum import write_csv
from qdraman.spectrum import write_excitation_csv
from qdraman.spectrum import write_spectrum_csv
from qdraman.spectrum import write_trace_csv


def test_spectrum_is_read_only() -> None:
    spectrum = Spectrum([0, 1, 2], [1, 2, 3])
    assert len(spectrum) == 3
    assert spectrum.grid.dtype == float
    with pytest.raises(ValueError):
        spectrum.values[0] = 5.0


@pytest.mark.parametrize(
    ('grid', 'values', 'match'),
    (
        ([0, 1], [1], 'same length'),
        ([], [], 'empty'),
        ([0, 0, 1], [1, 1, 1], 'increasing'),
        ([0, 1], [1, math.nan], 'finite'),
        ([0, 1], [1, -1], 'finite'),
    ),
)
def test_spectrum_validation(
    grid: list[float],
    values: list[float],
    match: str,
) -> None:
    with pytest.raises(ValueError, match=match):
        Spectrum(grid, values)


def test_spectrum_integrate_and_window() -> None:
    grid = uniform_grid(0.0, 10.0, 0.5)
    spectrum = Spectrum(grid, numpy.ones_like(grid))
    assert spectrum.is_uniform
    assert spectrum.grid_spacing == pytest.approx(0.5)
    assert spectrum.integrate() == pytest.approx(20.0)
    assert spectrum.integrate(-1.0, 1.0) == pytest.approx(2.0)
    assert spectrum.integrate(100.0, 200.0) == 0.0

    window = spectrum.window(-2.0, 2.0)
    assert window.grid[0] == pytest.approx(-2.0)
    assert window.grid[-1] == pytest.approx(2.0)
    with pytest.raises(ValueError, match='No spectrum samples'):
        spectrum.window(50.0, 60.0)

    assert spectrum.scaled(2.0).integrate() == pytest.approx(40.0)


def test_spectrum_peak() -> None:
    spectrum = Spectrum([0, 1, 2, 3], [0, 5, 2, 1])
    assert spectrum.peak() == (1.0, 5.0)
    assert not Spectrum([0, 1, 3], [0, 0, 0]).is_uniform


def test_correlation_trace() -> None:
    trace = CorrelationTrace([0, 10, 20], [0.0, 0.5, 1.0], 2.0)
    assert len(trace) == 3
    assert trace.is_uniform
    assert trace.at(5.0) == pytest.approx(0.25)
    assert trace.normalization == 2.0

    with pytest.raises(ValueError, match='increasing'):
        CorrelationTrace([0, 0], [1, 1])
    with pytest.raises(ValueError, match='empty'):
        CorrelationTrace([], [])


@pytest.mark.parametrize(
    ('value', 'expected'),
    (
        ('up', 'up'),
        (3, '3'),
        (0.5, '5.000000000000e-01'),
        (numpy.float64(-2.0), '-2.000000000000e+00'),
    ),
)
def test_format_cell(value: object, expected: str) -> None:
    assert format_cell(value) == expected  # type: ignore[arg-type]


@pytest.mark.parametrize('value', (math.nan, math.inf))
def test_format_cell_non_finite(value: float) -> None:
    with pytest.raises(ValueError, match='non-finite'):
        format_cell(value)


def test_write_csv_format(tmp_path: pathlib.Path) -> None:
    path = write_csv(
        tmp_path / 'sub' / 'out.csv',
        ('a', 'b'),
        [(1, 0.25), ('x', 2.0)],
        comment='spin=up',
    )
    raw = path.read_bytes()
    assert b'\r' not in raw
    assert raw.decode('utf-8').splitlines() == [
        '# spin=up',
        'a,b',
        '1,2.500000000000e-01',
        'x,2.000000000000e+00',
    ]

    comment, header, rows = read_csv(path)
    assert comment == 'spin=up'
    assert header == ['a', 'b']
    assert rows == [['1', '2.500000000000e-01'], ['x', '2.000000000000e+00']]


def test_write_spectrum_and_trace(tmp_path: pathlib.Path) -> None:
    spectrum = Spectrum([0.0, 1.0], [1.0, 2.0])
    comment, header, rows = read_csv(
        write_spectrum_csv(tmp_path / 's.csv', spectrum),
    )
    assert comment is None
    assert header == ['energy_ueV', 'intensity']
    assert len(rows) == 2

    trace = CorrelationTrace([0.0, 10.0], [0.1, 1.0])
    _, header, rows = read_csv(write_trace_csv(tmp_path / 't.csv', trace))
    assert header == ['tau_ps', 'g2']
    assert float(rows[1][1]) == 1.0


def test_write_excitation_csv(tmp_path: pathlib.Path) -> None:
    stokes = Spectrum([0.0, 1.0], [1.0, 2.0])
    antistokes = Spectrum([0.0, 1.0], [3.0, 4.0])
    _, header, rows = read_csv(
        write_excitation_csv(tmp_path / 'e.csv', stokes, antistokes),
    )
    assert header == ['laser_ueV', 'I_S', 'I_AS']
    assert float(rows[0][2]) == 3.0

    with pytest.raises(ValueError, match='share'):
        write_excitation_csv(
            tmp_path / 'bad.csv',
            stokes,
            Spectrum([0.0, 2.0], [1.0, 1.0]),
        )


def test_uniform_grid() -> None:
    grid = uniform_grid(10.0, 1.0, 0.5)
    assert grid == pytest.approx([9.0, 9.5, 10.0, 10.5, 11.0])
    assert uniform_grid(1.0, 0.0, 0.1) == pytest.approx([1.0])

    with pytest.raises(ValueError, match='positive'):
        uniform_grid(0.0, 1.0, 0.0)
