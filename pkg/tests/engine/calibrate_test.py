from __future__ import annotations

import pytest

from qdraman.device import DeviceParameters
from qdraman.engine.calibrate import calibrate_coupling
from qdraman.engine.calibrate import dressed_transition
from qdraman.engine.calibrate import resolve_coupling
from qdraman.engine.calibrate import transition_linewidth
from qdraman.exceptions import CalibrationError
from testing.device import device_and_levels


def natural_fwhm(params: DeviceParameters) -> float:
    return (
        params.radiative_rate
        + params.spin_dephasing_rate / 2
        + params.spin_flip_rate
    )


@pytest.mark.parametrize('number', (1, 2, 3, 4))
def test_undressed_transition(number: int) -> None:
    params, levels = device_and_levels()
    dressed = dressed_transition(params, levels, number, coupling=0.0)
    assert dressed.number == number
    assert dressed.energy == pytest.approx(
        levels.transition(number).energy,
        abs=1e-6,
    )
    assert dressed.fwhm == pytest.approx(natural_fwhm(params))
    assert dressed.decay == pytest.approx(params.radiative_rate)


def test_purcell_broadening_grows_with_coupling() -> None:
    params, levels = device_and_levels()
    widths = [
        transition_linewidth(params, levels, coupling)
        for coupling in (0.0, 20.0, 50.0, 100.0)
    ]
    assert widths == sorted(widths)
    assert widths[0] == pytest.approx(natural_fwhm(params))


def test_calibrate_coupling() -> None:
    params, levels = device_and_levels()
    coupling = calibrate_coupling(params, levels, 18.0)
    assert 80 < coupling < 130
    width = transition_linewidth(params, levels, coupling)
    assert width == pytest.approx(18.0, rel=1e-6)
    assert resolve_coupling(params, levels) == pytest.approx(coupling)


def test_calibrate_natural_width_is_zero_coupling() -> None:
    params, levels = device_and_levels()
    target = transition_linewidth(params, levels, 0.0)
    assert calibrate_coupling(params, levels, target) == 0.0


def test_calibrate_below_natural_width() -> None:
    params, levels = device_and_levels()
    with pytest.raises(CalibrationError, match='below the natural'):
        calibrate_coupling(params, levels, 1.0)


def test_resolve_configured_coupling() -> None:
    params, levels = device_and_levels(qd_cavity_coupling=12.5)
    assert resolve_coupling(params, levels) == 12.5
