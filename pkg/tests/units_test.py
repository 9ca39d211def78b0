from __future__ import annotations

import math

import numpy
import pytest

from qdraman.units import ghz_to_uev
from qdraman.units import HBAR
from qdraman.units import internal_to_ps
from qdraman.units import lifetime_to_rate
from qdraman.units import ps_to_internal
from qdraman.units import purcell_rate
from qdraman.units import rate_to_lifetime
from qdraman.units import uev_to_ghz
from qdraman.units import UNITS
from qdraman.units import zeeman_splitting


def test_unit_system_constants() -> None:
    assert UNITS.energy_unit == 'ueV'
    assert UNITS.time_unit == 'ps'
    assert UNITS.hbar == HBAR


def test_frequency_conversion() -> None:
    assert ghz_to_uev(1.0) == pytest.approx(4.135668)
    assert uev_to_ghz(ghz_to_uev(125.0)) == pytest.approx(125.0)

    values = ghz_to_uev(numpy.array([0.0, 1.0, 2.0]))
    assert values == pytest.approx([0.0, 4.135668, 8.271336])


def test_time_conversion() -> None:
    assert ps_to_internal(HBAR) == pytest.approx(1.0)
    assert internal_to_ps(ps_to_internal(1234.5)) == pytest.approx(1234.5)


@pytest.mark.parametrize('lifetime', (1.0, 1100.0, 2.0e7))
def test_lifetime_rate_inverse(lifetime: float) -> None:
    rate = lifetime_to_rate(lifetime)
    assert rate == pytest.approx(HBAR / lifetime)
    assert rate_to_lifetime(rate) == pytest.approx(lifetime)


@pytest.mark.parametrize('value', (0.0, -1.0))
def test_lifetime_rate_nonpositive(value: float) -> None:
    with pytest.raises(ValueError, match='positive'):
        lifetime_to_rate(value)
    with pytest.raises(ValueError, match='positive'):
        rate_to_lifetime(value)


@pytest.mark.parametrize(
    ('g', 'b', 'expected'),
    (
        (0.43, 4.0, 99.560136),
        (0.21, 4.0, 48.622392),
        (0.43, 0.0, 0.0),
    ),
)
def test_zeeman_splitting(g: float, b: float, expected: float) -> None:
    assert zeeman_splitting(g, b) == pytest.approx(expected, abs=1e-6)


def test_zeeman_splitting_negative_field() -> None:
    with pytest.raises(ValueError, match='non-negative'):
        zeeman_splitting(0.43, -1.0)


def test_purcell_rate() -> None:
    # On resonance the rate is 4 g^2 / kappa.
    assert purcell_rate(10.0, 350.0, 0.0) == pytest.approx(400 / 350)
    # Detuning by half the linewidth halves the rate.
    assert purcell_rate(10.0, 350.0, 175.0) == pytest.approx(200 / 350)
    assert math.isclose(purcell_rate(0.0, 350.0, 0.0), 0.0)

    with pytest.raises(ValueError, match='positive'):
        purcell_rate(10.0, 0.0, 0.0)
