from __future__ import annotations

import logging
import pathlib
from typing import Any

import pytest

from qdraman.config import build_settings
from qdraman.config import Config
from qdraman.config import EngineConfig
from qdraman.config import find_line
from qdraman.config import flatten_mapping
from qdraman.config import InstrumentConfig
from qdraman.config import load_config
from qdraman.config import load_settings
from qdraman.config import parse_overrides
from qdraman.config import RunConfig
from qdraman.config import Settings
from qdraman.config import validate_config
from qdraman.exceptions import ConfigError
from qdraman.exceptions import ParameterError

CONFIGS = pathlib.Path(__file__).parents[1] / 'configs'


def write(tmp_path: pathlib.Path, text: str) -> pathlib.Path:
    filepath = tmp_path / 'config.toml'
    filepath.write_text(text)
    return filepath


def test_config_attr_access() -> None:
    d = {'a': 1, 'b': 2}
    config = Config(**d)

    assert config == d
    assert config.a == d['a']
    assert config.b == d['b']

    with pytest.raises(AttributeError, match='c'):
        config.c  # noqa: B018

    config.a = 2
    assert config.a != d['a']

    config.c = 2
    assert config.c == 2


def test_config_nested_dict() -> None:
    config = Config({'device': {'dipoles': {'t1_up': 0.5}}})
    assert config.device.dipoles.t1_up == 0.5

    config = Config([('a', 1), ('b', 2)])
    assert config.a == 1


@pytest.mark.parametrize(
    ('in_', 'out', 'kwargs'),
    (
        ({}, {}, {}),
        ({'a': 1}, {'a': 1}, {}),
        ({'a': {'b': 1}}, {'a.b': 1}, {}),
        ({'a': {'b': 1}}, {'a-b': 1}, {'sep': '-'}),
        ({'a': {'b': 1}}, {'x.a.b': 1}, {'parent': 'x'}),
        ({'a': {'b': {'c': 1}}}, {'a.b.c': 1}, {}),
        ({'a': {'b': 1}, 'c': 2}, {'a.b': 1, 'c': 2}, {}),
    ),
)
def test_flatten_mapping(
    in_: dict[str, Any],
    out: dict[str, Any],
    kwargs: dict[str, Any],
) -> None:
    assert flatten_mapping(in_, **kwargs) == out


def test_parse_overrides() -> None:
    overrides = parse_overrides(
        [
            'run.workers=8',
            'relaxation.regime=plateau-edge',
            'device.transition_numbering = "ascending"',
            'relaxation.t1_points=[[5.0, 1e7], [10.0, 1e5]]',
        ],
    )
    assert overrides == {
        'run.workers': 8,
        'relaxation.regime': 'plateau-edge',
        'device.transition_numbering': 'ascending',
        'relaxation.t1_points': [[5.0, 1e7], [10.0, 1e5]],
    }


@pytest.mark.parametrize('item', ('run.workers', '=4'))
def test_parse_overrides_malformed(item: str) -> None:
    with pytest.raises(ConfigError, match='key=value') as exc_info:
        parse_overrides([item])
    assert exc_info.value.source == '--set'


def test_find_line() -> None:
    text = """\
# comment
top = 1

[device]
cavity_hwhm = 175.0

[device.dipoles]
t1_up = 1.0

[run]
workers = 2
"""
    assert find_line(text, 'top') == 2
    assert find_line(text, 'device') == 4
    assert find_line(text, 'device.cavity_hwhm') == 5
    assert find_line(text, 'device.dipoles.t1_up') == 8
    assert find_line(text, 'run.workers') == 11
    assert find_line(text, 'run.missing') is None


def test_default_settings() -> None:
    settings = load_settings()
    assert settings == Settings()
    assert settings.engine.fock_cutoff == 2
    assert settings.device.cavity_hwhm == 175.0


def test_default_config_file_matches_defaults() -> None:
    assert load_settings(CONFIGS / 'default.toml') == Settings()


@pytest.mark.parametrize('name', ('default', 'fig4c', 'weak-coupling'))
def test_shipped_configs_are_valid(name: str) -> None:
    settings = validate_config(CONFIGS / f'{name}.toml')
    assert isinstance(settings, Settings)


def test_load_settings_with_overrides(tmp_path: pathlib.Path) -> None:
    filepath = write(
        tmp_path,
        """\
[device]
drive_rabi = 2
qd_cavity_coupling = 12.5

[device.dipoles]
t1_up = 0.5

[relaxation]
regime = "plateau-edge"
""",
    )
    settings = load_settings(
        filepath,
        ['device.drive_rabi=3', 'engine.fock_cutoff=3'],
    )
    assert settings.device.drive_rabi == 3.0
    assert isinstance(settings.device.drive_rabi, float)
    assert settings.device.qd_cavity_coupling == 12.5
    assert settings.device.dipoles.t1_up == 0.5
    assert settings.device.dipoles.t2_down == 1.0
    assert settings.relaxation.regime == 'plateau-edge'
    assert settings.engine.fock_cutoff == 3


@pytest.mark.parametrize(
    ('text', 'key', 'line', 'match'),
    (
        ('[device]\nfoo = 1\n', 'device.foo', 2, 'Unknown'),
        ('[engine]\n\nfock_cutoff = 2.5\n', 'engine.fock_cutoff', 3, 'int'),
        ('[device]\nqd_hwhm = -1.0\n', 'device.qd_hwhm', 2, 'positive'),
        ('[device]\ndrive_rabi = true\n', 'device.drive_rabi', 2, 'float'),
        (
            '[relaxation]\nregime = "edge"\n',
            'relaxation.regime',
            2,
            'Expected',
        ),
        ('[run]\nworkers = 0\n', 'run.workers', 2, 'positive'),
    ),
)
def test_load_settings_errors(
    tmp_path: pathlib.Path,
    text: str,
    key: str,
    line: int,
    match: str,
) -> None:
    filepath = write(tmp_path, text)
    with pytest.raises(ConfigError, match=match) as exc_info:
        load_settings(filepath)
    assert exc_info.value.key == key
    assert exc_info.value.line == line
    assert exc_info.value.source == str(filepath)
    assert f'line {line}' in str(exc_info.value)


def test_override_errors_name_the_override(tmp_path: pathlib.Path) -> None:
    filepath = write(tmp_path, '[device]\ndrive_rabi = 1.0\n')
    with pytest.raises(ConfigError) as exc_info:
        load_settings(filepath, ['device.drive_rabi=-1'])
    assert exc_info.value.key == 'device.drive_rabi'
    assert exc_info.value.source == '--set'
    assert exc_info.value.line is None


def test_invalid_toml(tmp_path: pathlib.Path) -> None:
    filepath = write(tmp_path, '[device]\ncavity_hwhm = \n')
    with pytest.raises(ConfigError, match='Invalid TOML') as exc_info:
        load_settings(filepath)
    assert exc_info.value.line == 2


def test_load_config_keeps_source(tmp_path: pathlib.Path) -> None:
    filepath = write(tmp_path, '[device]\nmagnetic_field = 6.75\n')
    config = load_config(filepath)
    assert config.device.magnetic_field == 6.75
    assert isinstance(config.device, Config)
    assert config.source == str(filepath)
    assert config.line('device.magnetic_field') == 2
    assert Config(config).line('device') is None

    with pytest.raises(AttributeError, match='config.toml'):
        config.engine  # noqa: B018


def test_load_config_missing_file(tmp_path: pathlib.Path) -> None:
    with pytest.raises(OSError, match='exist'):
        load_config(tmp_path / 'config.toml')


def test_build_settings_nested_document() -> None:
    settings = build_settings(
        {'device': {'magnetic_field': 6.75}, 'run': {'workers': 1}},
    )
    assert settings.device.magnetic_field == 6.75
    assert settings.run.workers == 1


def test_cavity_width_from_quality_factor() -> None:
    settings = build_settings({'device': {'cavity_q': 3000}})
    assert settings.device.cavity_q == 3000.0
    assert isinstance(settings.device.cavity_hwhm, float)
    assert settings.device.cavity_hwhm == pytest.approx(1_290_700.0 / 6000)
    assert settings.device.kappa == pytest.approx(1_290_700.0 / 3000)

    settings = build_settings({'device': {'cavity_hwhm': 160}})
    assert settings.device.cavity_hwhm == 160.0
    assert settings.device.cavity_q is None


def test_cavity_width_cross_check() -> None:
    # Q = 3688 gives a FWHM within 0.1% of 2 * 175.
    settings = build_settings(
        {'device': {'cavity_hwhm': 175.0, 'cavity_q': 3688}},
    )
    assert settings.device.cavity_hwhm == 175.0

    with pytest.raises(ConfigError, match='differs') as exc_info:
        build_settings({'device': {'cavity_hwhm': 175.0, 'cavity_q': 2000}})
    assert exc_info.value.key == 'device.cavity_q'


def test_settings_flatten() -> None:
    flat = Settings().flatten()
    assert list(flat) == sorted(flat)
    assert flat['device.dipoles.t1_up'] == 1.0
    assert flat['engine.fock_cutoff'] == 2
    assert flat['relaxation.t1_points'] == [[5.2, 2.0e7], [16.0, 7.0e4]]
    assert flat['device.qd_cavity_coupling'] is None


@pytest.mark.parametrize(
    ('factory', 'kwargs', 'key'),
    (
        (EngineConfig, {'fock_cutoff': 0}, 'fock_cutoff'),
        (EngineConfig, {'rcond': 0.0}, 'rcond'),
        (InstrumentConfig, {'fp_fwhm': 500.0}, 'fp_fwhm'),
        (RunConfig, {'field_min': 8.0}, 'field_min'),
        (RunConfig, {'g2_step': -1.0}, 'g2_step'),
    ),
)
def test_record_validation(
    factory: type[Any],
    kwargs: dict[str, Any],
    key: str,
) -> None:
    with pytest.raises(ParameterError) as exc_info:
        factory(**kwargs)
    assert exc_info.value.key == key


def test_validate_config_logs(
    tmp_path: pathlib.Path,
    caplog: pytest.LogCaptureFixture,
) -> None:
    filepath = write(tmp_path, '[run]\nworkers = 2\n')
    with caplog.at_level(logging.INFO, logger='qdraman'):
        settings = validate_config(filepath)
    assert settings.run.workers == 2
    assert f'Configuration {filepath} is valid' in caplog.text
