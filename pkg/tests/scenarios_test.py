from __future__ import annotations

import json
import pathlib
from unittest import mock

import pytest

import qdraman
from qdraman.config import Settings
from qdraman.device import build_level_structure
from qdraman.exceptions import ConfigError
from qdraman.exceptions import OracleMismatchError
from qdraman.scenarios import MANIFEST_NAME
from qdraman.scenarios import register
from qdraman.scenarios import run_scenario
from qdraman.scenarios import RunManifest
from qdraman.scenarios import Scenario
from qdraman.scenarios import scenario_names
from qdraman.scenarios import ScenarioContext
from qdraman.spectrum import read_csv
from testing.device import fast_settings


def test_scenario_names() -> None:
    assert scenario_names() == (
        'asymmetry_fig4a',
        'excitation_fig3c',
        'g2_fig4c',
        'oracle_check',
        'ratio_fig4b',
        'selectivity_fig5b',
        'sidebands_fig2d',
        'spin_resolved_fig5de',
        'tuning_fig3ab',
    )


def test_unknown_scenario() -> None:
    with pytest.raises(ConfigError, match='Unknown scenario') as exc_info:
        Scenario('fig9')
    assert exc_info.value.key == 'scenario'


def test_register_duplicate() -> None:
    with pytest.raises(ValueError, match='already registered'):
        register('ratio_fig4b')(lambda ctx: [])


def test_overrides_require_unresolved_config(tmp_path: pathlib.Path) -> None:
    scenario = Scenario('ratio_fig4b', ('run.workers=1',), tmp_path)
    with pytest.raises(ConfigError, match='Overrides'):
        run_scenario(scenario, Settings())


def test_context_map_preserves_order(tmp_path: pathlib.Path) -> None:
    ctx = ScenarioContext(fast_settings(), tmp_path)
    assert ctx.map(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    assert ctx.path('a.csv') == tmp_path / 'a.csv'
    report = ctx.write_report('report.txt', 'line\n\n')
    assert report.read_text() == 'line\n'


def test_ratio_scenario(tmp_path: pathlib.Path) -> None:
    manifest = run_scenario(Scenario('ratio_fig4b', out=tmp_path))
    assert manifest.scenario == 'ratio_fig4b'
    assert manifest.version == qdraman.__version__
    assert set(manifest.files) == {
        'ratio.csv',
        'sidebands_red.csv',
        'sidebands_blue.csv',
    }
    comment, header, rows = read_csv(tmp_path / 'ratio.csv')
    assert comment is not None
    ratio = float(comment.split('=')[1])
    assert ratio == pytest.approx(18.52, rel=0.01)
    assert header == ['side', 'laser_ueV', 'I_S', 'I_AS']
    assert [row[0] for row in rows] == ['red', 'blue']
    assert manifest.verify(tmp_path)


def test_manifest_is_deterministic(tmp_path: pathlib.Path) -> None:
    overrides = ('run.asymmetry_detuning=300',)
    first = run_scenario(
        Scenario('ratio_fig4b', overrides, tmp_path / 'first'),
    )
    second = run_scenario(
        Scenario('ratio_fig4b', overrides, tmp_path / 'second'),
    )
    assert first == second
    assert first.to_json() == second.to_json()
    text = (tmp_path / 'first' / MANIFEST_NAME).read_text()
    assert text == (tmp_path / 'second' / MANIFEST_NAME).read_text()
    document = json.loads(text)
    assert document['overrides'] == list(overrides)
    assert document['config']['run.asymmetry_detuning'] == 300.0


def test_manifest_verify_detects_changes(tmp_path: pathlib.Path) -> None:
    manifest = run_scenario(Scenario('tuning_fig3ab', out=tmp_path))
    assert manifest.verify(tmp_path)
    with open(tmp_path / 'tuning.csv', 'a') as f:
        f.write('extra\n')
    assert not manifest.verify(tmp_path)
    (tmp_path / 'tuning.csv').unlink()
    assert not manifest.verify(tmp_path)


def test_manifest_write(tmp_path: pathlib.Path) -> None:
    manifest = RunManifest(
        scenario='ratio_fig4b',
        version='1.0.0',
        config={'run.workers': 2},
        overrides=(),
        files={},
    )
    path = manifest.write(tmp_path)
    assert path.name == MANIFEST_NAME
    assert path.read_text().endswith('}\n')
    assert json.loads(path.read_text())['config'] == {'run.workers': 2}


def test_tuning_scenario(tmp_path: pathlib.Path) -> None:
    run_scenario(Scenario('tuning_fig3ab', out=tmp_path))
    _, header, rows = read_csv(tmp_path / 'tuning.csv')
    assert header[0] == 'laser_ueV'
    assert len(rows) == 26
    for row in rows:
        laser, stokes, antistokes = (float(v) for v in row[:3])
        assert laser - stokes == pytest.approx(antistokes - laser)


def test_selectivity_scenario(tmp_path: pathlib.Path) -> None:
    run_scenario(Scenario('selectivity_fig5b', out=tmp_path))
    _, header, rows = read_csv(tmp_path / 'selectivity.csv')
    assert header == ['B_T', 'E_z_ueV', 'selectivity']
    assert len(rows) == 25
    values = {float(row[0]): float(row[2]) for row in rows}
    assert values[1.0] == pytest.approx(0.109, abs=0.005)
    assert values[4.0] == pytest.approx(0.581, abs=0.005)
    assert all(-1 <= v <= 1 for v in values.values())


def test_excitation_scenario(tmp_path: pathlib.Path) -> None:
    manifest = run_scenario(
        Scenario('excitation_fig3c', ('run.workers=1',), tmp_path),
    )
    assert set(manifest.files) == {
        'excitation.csv',
        'reflectance_markers.csv',
        'resonance_fits.csv',
        'resonance_fits.txt',
    }
    _, header, rows = read_csv(tmp_path / 'resonance_fits.csv')
    assert header == ['model', 'param', 'value', 'sigma']
    fwhms = [float(row[2]) for row in rows if row[1] == 'fwhm']
    assert fwhms == pytest.approx([18.0, 18.0], rel=0.05)

    centers = {
        row[0]: float(row[2]) for row in rows if row[1] == 'center'
    }
    levels = build_level_structure(Settings().device)
    assert centers['antistokes_resonance'] == pytest.approx(
        levels.transition(1).energy,
        abs=0.5,
    )
    assert centers['stokes_resonance'] == pytest.approx(
        levels.transition(4).energy,
        abs=0.5,
    )


def test_asymmetry_scenario(tmp_path: pathlib.Path) -> None:
    manifest = run_scenario(Scenario('asymmetry_fig4a', out=tmp_path))
    assert 'cavity_raman_fits.csv' in manifest.files
    _, _, rows = read_csv(tmp_path / 'excitation.csv')
    assert len(rows) > 100


def test_sidebands_scenario(tmp_path: pathlib.Path) -> None:
    manifest = run_scenario(Scenario('sidebands_fig2d', out=tmp_path), None)
    assert set(manifest.files) == {
        'sidebands_engine.csv',
        'sidebands_perturbative.csv',
        'model_report.txt',
        'sideband_fits.csv',
        'sideband_fits.txt',
        'fp_scan.csv',
    }
    report = (tmp_path / 'model_report.txt').read_text()
    assert 'hilbert dimension: 12' in report


def test_sidebands_scenario_with_settings(tmp_path: pathlib.Path) -> None:
    settings = fast_settings()
    manifest = run_scenario(
        Scenario('sidebands_fig2d', out=tmp_path),
        settings,
    )
    assert manifest.config == settings.flatten()
    _, _, rows = read_csv(tmp_path / 'sideband_fits.csv')
    centers = {
        row[0]: float(row[2]) for row in rows if row[1] == 'center'
    }
    splitting = 99.560136
    shift = centers['antistokes_sideband'] - centers['stokes_sideband']
    assert shift == pytest.approx(2 * splitting, abs=1.0)


def test_oracle_scenario(tmp_path: pathlib.Path) -> None:
    run_scenario(Scenario('oracle_check', out=tmp_path), fast_settings())
    comment, _, rows = read_csv(tmp_path / 'oracle.csv')
    assert comment is not None
    assert comment.startswith('rms=')
    assert len(rows) == 10


def test_oracle_scenario_mismatch(tmp_path: pathlib.Path) -> None:
    settings = fast_settings(oracle_tolerance=1e-9)
    with pytest.raises(OracleMismatchError) as exc_info:
        run_scenario(Scenario('oracle_check', out=tmp_path), settings)
    assert exc_info.value.tolerance == 1e-9
    assert (tmp_path / 'oracle.csv').is_file()
    assert not (tmp_path / MANIFEST_NAME).exists()


def test_g2_scenario(tmp_path: pathlib.Path) -> None:
    run_scenario(Scenario('g2_fig4c', out=tmp_path))
    _, header, rows = read_csv(tmp_path / 'g2_raw.csv')
    assert header == ['tau_ps', 'g2']
    assert len(rows) == 1201
    assert float(rows[0][1]) < 0.05
    _, _, convolved = read_csv(tmp_path / 'g2_convolved.csv')
    assert float(convolved[0][1]) > float(rows[0][1])
    _, _, fits = read_csv(tmp_path / 'g2_fit.csv')
    t_rise = next(float(row[2]) for row in fits if row[1] == 't_rise')
    assert 700 < t_rise < 1300


def test_spin_resolved_scenario_layout(tmp_path: pathlib.Path) -> None:
    settings = fast_settings(pump_duration=2.0e4)
    manifest = run_scenario(
        Scenario('spin_resolved_fig5de', out=tmp_path),
        settings,
    )
    expected = {
        f'spin_{spin}_{side}.csv'
        for spin in ('down', 'up', 'mixed')
        for side in ('stokes', 'antistokes')
    }
    assert set(manifest.files) == expected | {'spin_contrast.csv'}
    _, header, rows = read_csv(tmp_path / 'spin_contrast.csv')
    assert header == ['spin', 'fidelity', 'I_S', 'I_AS']
    contrast = {row[0]: [float(v) for v in row[1:]] for row in rows}
    assert contrast['down'][0] > 0.95
    assert contrast['up'][0] > 0.95
    assert contrast['mixed'][0] == 0.5
    # The down spin is the anti-Stokes emitter at the pinned laser.
    assert contrast['down'][2] > 20 * contrast['up'][2]


def test_run_scenario_logs(
    tmp_path: pathlib.Path,
    caplog: pytest.LogCaptureFixture,
) -> None:
    with mock.patch('qdraman.scenarios.Timer') as timer:
        timer.return_value.stop.return_value = 1.5
        with caplog.at_level('INFO', logger='qdraman'):
            run_scenario(Scenario('ratio_fig4b', out=tmp_path))
    assert 'Running scenario ratio_fig4b' in caplog.text
    assert 'wrote 3 files in 1.50 s' in caplog.text
