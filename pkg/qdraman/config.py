"""TOML configuration of devices, solvers and runs.

A configuration file has up to six tables, each mapped onto a frozen
record:

| Table               | Record                                          |
| ------------------- | ----------------------------------------------- |
| `[device]`          | [`DeviceParameters`][qdraman.device.DeviceParameters] |
| `[device.dipoles]`  | [`Dipoles`][qdraman.device.Dipoles]             |
| `[engine]`          | [`EngineConfig`][qdraman.config.EngineConfig]   |
| `[relaxation]`      | [`RelaxationModel`][qdraman.spin.RelaxationModel] |
| `[instrument]`      | [`InstrumentConfig`][qdraman.config.InstrumentConfig] |
| `[run]`             | [`RunConfig`][qdraman.config.RunConfig]         |

Missing keys take the record defaults, so an empty file is the default
device.
"""

from __future__ import annotations

import collections
import dataclasses
import logging
import pathlib
import re
import sys
import typing
from collections.abc import Iterable
from collections.abc import Mapping
from collections.abc import Sequence
from typing import Any
from typing import Union

from qdraman.device import DeviceParameters
from qdraman.device import Dipoles
from qdraman.exceptions import ConfigError
from qdraman.exceptions import ParameterError
from qdraman.spin import RelaxationModel

if sys.version_info >= (3, 11):  # pragma: >=3.11 cover
    import tomllib
else:  # pragma: <3.11 cover
    import tomli as tomllib

logger = logging.getLogger(__name__)

OVERRIDE_SOURCE = '--set'


class Config(dict[str, Any]):
    """Raw configuration document with attribute access.

    Nested tables become `Config` instances, so a loaded document reads
    like the TOML it came from. Documents read from a file remember the
    file and its text so keys can be traced back to their line.

    Example:
        ```python
        >>> from qdraman.config import Config
        >>> config = Config({'device': {'magnetic_field': 4.0}})
        >>> config.device.magnetic_field
        4.0
        >>> config.line('device.magnetic_field') is None
        True
        ```

    Args:
        mapping: Initial mapping or iterable of tuples of key-value pairs.
        source: File the document was read from.
        text: Raw TOML text of `source`.
        kwargs: Additional top-level keys.
    """

    source: str | None
    text: str | None

    def __init__(
        self,
        mapping: Mapping[str, Any] | Iterable[tuple[str, Any]] | None = None,
        /,
        *,
        source: str | None = None,
        text: str | None = None,
        **kwargs: Any,
    ) -> None:
        super().__init__()
        object.__setattr__(self, 'source', source)
        object.__setattr__(self, 'text', text)
        for key, value in dict(mapping or {}, **kwargs).items():
            self[key] = value

    def __setitem__(self, key: str, value: Any) -> None:
        if isinstance(value, Mapping) and not isinstance(value, Config):
            value = Config(value)
        super().__setitem__(key, value)

    def __getattr__(self, key: str) -> Any:
        try:
            return self[key]
        except KeyError:
            where = f' in {self.source}' if self.source else ''
            raise AttributeError(
                f'No configuration key {key!r}{where}.',
            ) from None

    def __setattr__(self, key: str, value: Any) -> None:
        self[key] = value

    def line(self, key: str) -> int | None:
        """1-based line of dotted `key` in the source text, if known."""
        return None if self.text is None else find_line(self.text, key)


def flatten_mapping(
    d: Mapping[str, Any],
    parent: str | None = None,
    sep: str = '.',
) -> dict[str, Any]:
    """Flatten mapping into dict by joining nested keys via a separator.

    Warning:
        This function does not check for key collisions. E.g.,
        ```python
        >>> flatten_mapping({'a': {'b.c': 1}, 'a.b': {'c': 2}})
        {'a.b.c': 2}
        ```

    Args:
        d: Input mapping. All keys and nested keys must by strings.
        parent: Parent key to prepend to top-level keys in `d`.
        sep: Separator between keys.

    Returns:
        Flattened dictionary.
    """
    items: list[tuple[str, Any]] = []

    for key, value in d.items():
        new_key = f'{parent}{sep}{key}' if parent is not None else key
        if isinstance(value, collections.abc.Mapping):
            items.extend(flatten_mapping(value, new_key, sep).items())
        else:
            items.append((new_key, value))

    return dict(items)


@dataclasses.dataclass(frozen=True)
class EngineConfig:
    """Numerical settings of the Lindblad engine.

    Attributes:
        fock_cutoff: Highest cavity photon number.
        spectrum_step: Emission-spectrum grid spacing (μeV).
        sideband_window: Half width of the sideband windows (μeV).
        rtol: Relative tolerance of the adaptive integrator.
        atol: Absolute tolerance of the adaptive integrator.
        rcond: Relative singular-value cutoff of the steady-state null
            space.
        fock_guard: Largest accepted population of the highest Fock state.
    """

    fock_cutoff: int = 2
    spectrum_step: float = 0.1
    sideband_window: float = 30.0
    rtol: float = 1e-10
    atol: float = 1e-12
    rcond: float = 1e-12
    fock_guard: float = 1e-4

    def __post_init__(self) -> None:
        if self.fock_cutoff < 1:
            raise ParameterError(
                'fock_cutoff',
                f'fock_cutoff must be at least 1 but got {self.fock_cutoff}.',
            )
        _check_positive(self, exclude=('fock_cutoff',))


@dataclasses.dataclass(frozen=True)
class InstrumentConfig:
    """Measurement chain settings (μeV for the filter, ps for the detector)."""

    fp_fwhm: float = 1.7
    fp_fsr: float = 400.0
    detector_width: float = 400.0

    def __post_init__(self) -> None:
        _check_positive(self)
        if self.fp_fwhm >= self.fp_fsr:
            raise ParameterError(
                'fp_fwhm',
                f'fp_fwhm ({self.fp_fwhm}) must be below fp_fsr '
                f'({self.fp_fsr}).',
            )


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Scenario sweep settings.

    Attributes:
        workers: Threads used for sweeps.
        field_min: First field of the selectivity sweep (T).
        field_max: Last field of the selectivity sweep (T).
        field_step: Field step of the selectivity sweep (T).
        laser_step_coarse: Laser step of wide excitation scans (μeV).
        laser_step_fine: Laser step of scans across one resonance (μeV).
        g2_field: Field of the correlation measurement (T).
        g2_cavity_detuning: Cavity detuning from E_X for the correlation
            measurement (μeV).
        g2_rise_time: Antibunching rise time that sets the spin-flip rate
            of the correlation measurement (ps).
        g2_max_delay: Largest correlation delay (ps).
        g2_step: Correlation delay step (ps).
        asymmetry_detuning: Laser detuning from E_X of the asymmetry ratio
            (μeV).
        pump_duration: Optical pumping duration (ps).
        pump_rabi: Rabi energy of the pumping laser (μeV).
        oracle_coupling: Dot-cavity coupling of the oracle check (μeV).
        oracle_tolerance: Accepted RMS relative deviation of the oracle
            check.
    """

    workers: int = 4
    field_min: float = 1.0
    field_max: float = 7.0
    field_step: float = 0.25
    laser_step_coarse: float = 2.0
    laser_step_fine: float = 0.5
    g2_field: float = 6.75
    g2_cavity_detuning: float = -150.0
    g2_rise_time: float = 1100.0
    g2_max_delay: float = 12000.0
    g2_step: float = 10.0
    asymmetry_detuning: float = 440.0
    pump_duration: float = 50000.0
    pump_rabi: float = 3.0
    oracle_coupling: float = 10.0
    oracle_tolerance: float = 0.05

    def __post_init__(self) -> None:
        _check_positive(
            self,
            exclude=('g2_cavity_detuning', 'field_min'),
        )
        if not 0 <= self.field_min <= self.field_max:
            raise ParameterError(
                'field_min',
                f'Field range [{self.field_min}, {self.field_max}] T is '
                'invalid.',
            )


def _check_positive(record: Any, exclude: Sequence[str] = ()) -> None:
    for field in dataclasses.fields(record):
        if field.name in exclude:
            continue
        value = getattr(record, field.name)
        if not value > 0:
            raise ParameterError(
                field.name,
                f'{field.name} must be positive but got {value}.',
            )


@dataclasses.dataclass(frozen=True)
class Settings:
    """Resolved configuration of a run."""

    device: DeviceParameters = DeviceParameters()
    engine: EngineConfig = EngineConfig()
    relaxation: RelaxationModel = RelaxationModel()
    instrument: InstrumentConfig = InstrumentConfig()
    run: RunConfig = RunConfig()

    def flatten(self) -> dict[str, Any]:
        """Flat snapshot with dotted keys and JSON-compatible values."""
        device = dataclasses.asdict(self.device)
        device['dipoles'] = self.device.dipoles._asdict()
        document = {
            'device': device,
            'engine': dataclasses.asdict(self.engine),
            'relaxation': dataclasses.asdict(self.relaxation),
            'instrument': dataclasses.asdict(self.instrument),
            'run': dataclasses.asdict(self.run),
        }
        flat = flatten_mapping(document)
        return {key: _jsonable(flat[key]) for key in sorted(flat)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    return value


SECTIONS: dict[str, type[Any]] = {
    'device': DeviceParameters,
    'device.dipoles': Dipoles,
    'engine': EngineConfig,
    'relaxation': RelaxationModel,
    'instrument': InstrumentConfig,
    'run': RunConfig,
}


def _field_names(cls: type[Any]) -> tuple[str, ...]:
    if dataclasses.is_dataclass(cls):
        return tuple(f.name for f in dataclasses.fields(cls))
    return tuple(cls._fields)


def _type_name(hint: Any) -> str:
    return getattr(hint, '__name__', None) or str(hint).replace('typing.', '')


def _matches(value: Any, hint: Any) -> bool:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if hint is Any:
        return True
    if origin is typing.Literal:
        return value in args
    if origin is Union:
        return any(_matches(value, arg) for arg in args)
    if hint is type(None):
        return value is None
    if hint is bool:
        return isinstance(value, bool)
    if hint is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if hint is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if hint is Dipoles:
        return (
            isinstance(value, (list, tuple))
            and len(value) == len(Dipoles._fields)
            and all(_matches(v, float) for v in value)
        )
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            return False
        if len(args) == 2 and args[1] is Ellipsis:
            return all(_matches(v, args[0]) for v in value)
        return len(value) == len(args) and all(
            _matches(v, a) for v, a in zip(value, args)
        )
    try:
        return isinstance(value, hint)
    except TypeError as e:
        # Not all types support isinstance checks so we just log the
        # error and skip.
        logger.debug(f'Unable to verify config value {value!r}: {hint}\n{e}')
        return True


def _convert(value: Any, hint: Any) -> Any:
    if isinstance(value, list):
        value = tuple(_convert(v, None) for v in value)
    numeric = hint is float or (
        typing.get_origin(hint) is Union and float in typing.get_args(hint)
    )
    if numeric and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if hint is Dipoles:
        return Dipoles(*(float(v) for v in value))
    return value


_HEADER = re.compile(r'^\s*\[\s*([^\[\]]+?)\s*\]\s*(#.*)?$')
_ASSIGNMENT = re.compile(r'^\s*([A-Za-z0-9_.\-"\']+)\s*=')


def find_line(text: str, key: str) -> int | None:
    """1-based line of a dotted key in TOML text, or `None`.

    Table headers are tracked so `device.cavity_hwhm` is found under
    `[device]`; a key naming a table resolves to its header line.
    """
    table = ''
    for number, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header is not None:
            table = header.group(1).replace(' ', '')
            if table == key:
                return number
            continue
        assignment = _ASSIGNMENT.match(line)
        if assignment is None:
            continue
        name = assignment.group(1).strip('"\'')
        full = f'{table}.{name}' if table else name
        if full == key:
            return number
    return None


def _split_key(key: str) -> tuple[str, str] | None:
    section, _, name = key.rpartition('.')
    if section in SECTIONS and name in _field_names(SECTIONS[section]):
        return section, name
    return None


def parse_overrides(items: Iterable[str]) -> dict[str, Any]:
    """Parse `key=value` overrides, reading values as TOML.

    Values that are not valid TOML (e.g., `regime=plateau-edge`) are
    taken as bare strings.

    Raises:
        ConfigError: If an item has no `=`.
    """
    overrides: dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ConfigError(
                f'Override {item!r} must have the form key=value.',
                source=OVERRIDE_SOURCE,
            )
        try:
            value = tomllib.loads(f'value = {raw.strip()}')['value']
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        overrides[key] = value
    return overrides


def load_config(filepath: pathlib.Path | str) -> Config:
    """Load a TOML file as a [`Config`][qdraman.config.Config].

    Args:
        filepath: TOML file to load.

    Returns:
        Parsed document that remembers its source file and text.

    Raises:
        OSError: If the file does not exist.
        ConfigError: If the file is not valid TOML.
    """
    source = str(pathlib.Path(filepath))
    filepath = pathlib.Path(filepath).absolute()
    if not filepath.exists():
        raise OSError(f'{filepath} does not exist.')

    text = filepath.read_text(encoding='utf-8')
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = re.search(r'line (\d+)', str(e))
        raise ConfigError(
            f'Invalid TOML: {e}.',
            line=int(match.group(1)) if match else None,
            source=source,
        ) from e
    return Config(document, source=source, text=text)


def build_settings(
    document: Mapping[str, Any],
    overrides: Mapping[str, Any] | None = None,
    *,
    source: str | None = None,
    text: str | None = None,
) -> Settings:
    """Validate a configuration document and build the run records.

    Args:
        document: Nested configuration mapping.
        overrides: Dotted-key values applied on top of `document`.
        source: Name of the configuration file for error messages.
        text: Raw file text used to locate offending keys.

    Returns:
        Resolved settings.

    Raises:
        ConfigError: On unknown keys, type mismatches or invalid values.
    """
    overrides = overrides or {}
    flat = flatten_mapping(document)
    entries = [(key, value, source) for key, value in flat.items()]
    entries.extend(
        (key, value, OVERRIDE_SOURCE) for key, value in overrides.items()
    )

    def fail(message: str, key: str, origin: str | None) -> ConfigError:
        line = None
        if origin == source and text is not None:
            line = find_line(text, key)
        return ConfigError(message, key=key, line=line, source=origin)

    values: dict[str, dict[str, Any]] = {name: {} for name in SECTIONS}
    origins: dict[str, str | None] = {}
    for key, value, origin in entries:
        split = _split_key(key)
        if split is None:
            raise fail(f'Unknown configuration key {key!r}.', key, origin)
        section, name = split
        hint = typing.get_type_hints(SECTIONS[section])[name]
        if not _matches(value, hint):
            raise fail(
                f'Expected {key} to be {_type_name(hint)} but got '
                f'{type(value).__name__} {value!r}.',
                key,
                origin,
            )
        values[section][name] = _convert(value, hint)
        origins[key] = origin

    def build(section: str, **extra: Any) -> Any:
        kwargs = {**values[section], **extra}
        try:
            return SECTIONS[section](**kwargs)
        except ParameterError as e:
            key = f'{section}.{e.key}'
            raise fail(str(e), key, origins.get(key, source)) from e

    device_kwargs: dict[str, Any] = {}
    if values['device.dipoles']:
        base = values['device'].get('dipoles', Dipoles())
        device_kwargs['dipoles'] = base._replace(**values['device.dipoles'])

    settings = Settings(
        device=build('device', **device_kwargs),
        engine=build('engine'),
        relaxation=build('relaxation'),
        instrument=build('instrument'),
        run=build('run'),
    )
    logger.debug(f'Resolved configuration from {source or "defaults"}')
    return settings


def load_settings(
    filepath: pathlib.Path | str | None = None,
    overrides: Iterable[str] = (),
) -> Settings:
    """Load, override and validate a configuration file.

    Args:
        filepath: TOML file; the defaults are used when `None`.
        overrides: `key=value` strings applied after the file.

    Returns:
        Resolved settings.

    Raises:
        ConfigError: If the file or an override is invalid.
    """
    parsed = parse_overrides(overrides)
    if filepath is None:
        return build_settings({}, parsed)
    config = load_config(filepath)
    return build_settings(
        config,
        parsed,
        source=config.source,
        text=config.text,
    )


def validate_config(filepath: pathlib.Path | str) -> Settings:
    """Validate a configuration file and fill in the defaults.

    Args:
        filepath: TOML file, which must exist.

    Returns:
        Resolved device parameters and scenario defaults.

    Raises:
        ConfigError: On unknown keys, type mismatches or invariant
            violations.
        OSError: If the file cannot be read.
    """
    settings = load_settings(filepath)
    logger.info(f'Configuration {filepath} is valid')
    return settings
