"""Figure-reproduction pipelines and their run manifests.

Each scenario reads the resolved [`Settings`][qdraman.config.Settings],
writes CSV files and text reports into its output directory and returns
the written paths. [`run_scenario()`][qdraman.scenarios.run_scenario]
records them with their digests in `manifest.json`.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import logging
import pathlib
from collections.abc import Callable
from collections.abc import Iterable
from collections.abc import Sequence
from typing import Any
from typing import TypeVar

import numpy

import qdraman
from qdraman.config import load_settings
from qdraman.config import Settings
from qdraman.device import build_level_structure
from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.engine import build_model
from qdraman.engine import dressed_transition
from qdraman.engine import EmissionSpectrumSolver
from qdraman.engine import g2
from qdraman.engine import resolve_coupling
from qdraman.engine import sideband_weights
from qdraman.engine import steady_state
from qdraman.engine.model import LindbladModel
from qdraman.engine.solvers import DensityMatrix
from qdraman.exceptions import ConfigError
from qdraman.exceptions import OracleMismatchError
from qdraman.fitting import fit_cavity_raman
from qdraman.fitting import fit_g2_rise
from qdraman.fitting import fit_lorentzian
from qdraman.fitting import FitResult
from qdraman.instrument import convolve_g2
from qdraman.instrument import DetectorResponse
from qdraman.instrument import FabryPerotFilter
from qdraman.instrument import fp_scan
from qdraman.instrument import order_window
from qdraman.raman import asymmetry_ratio
from qdraman.raman import excitation_spectrum
from qdraman.raman import pinned_laser_energy
from qdraman.raman import raman_intensities
from qdraman.raman import reflectance_markers
from qdraman.raman import selectivity_sweep
from qdraman.raman import sideband_lineshape
from qdraman.spectrum import CellT
from qdraman.spectrum import Spectrum
from qdraman.spectrum import uniform_grid
from qdraman.spectrum import write_csv
from qdraman.spectrum import write_excitation_csv
from qdraman.spectrum import write_spectrum_csv
from qdraman.spectrum import write_trace_csv
from qdraman.spin import pump_spin
from qdraman.spin import randomized_spin_raman
from qdraman.spin import SidebandSpectra
from qdraman.spin import spin_resolved_raman
from qdraman.spin import SpinState
from qdraman.timer import Timer
from qdraman.units import ghz_to_uev
from qdraman.units import HBAR
from qdraman.utils import file_digest
from qdraman.utils import log_step

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
TUNING_RANGE_GHZ = 125.0
"""Laser tuning range of the sideband-tuning scan."""
TUNING_STEP_GHZ = 5.0

T = TypeVar('T')
R = TypeVar('R')


@dataclasses.dataclass(frozen=True)
class ScenarioContext:
    """Inputs of a scenario pipeline."""

    settings: Settings
    out: pathlib.Path

    @property
    def params(self) -> DeviceParameters:
        """Device parameters of the run."""
        return self.settings.device

    @property
    def levels(self) -> LevelStructure:
        """Level structure of the run's device."""
        return build_level_structure(self.settings.device)

    def path(self, name: str) -> pathlib.Path:
        """Path of an output file."""
        return self.out / name

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Evaluate sweep points concurrently, preserving their order."""
        workers = self.settings.run.workers
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))

    def write_report(self, name: str, text: str) -> pathlib.Path:
        """Write a UTF-8 text report."""
        path = self.path(name)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text.rstrip('\n') + '\n')
        return path

    def write_fits(
        self,
        name: str,
        fits: Sequence[FitResult],
    ) -> list[pathlib.Path]:
        """Write fits as `<name>.csv` rows and a `<name>.txt` report."""
        rows: list[Sequence[CellT]] = [
            row for fit in fits for row in fit.rows()
        ]
        csv_path = write_csv(
            self.path(f'{name}.csv'),
            ('model', 'param', 'value', 'sigma'),
            rows,
        )
        report = '\n\n'.join(fit.report() for fit in fits)
        return [csv_path, self.write_report(f'{name}.txt', report)]


ScenarioFn = Callable[[ScenarioContext], list[pathlib.Path]]

_REGISTRY: dict[str, ScenarioFn] = {}


def register(name: str) -> Callable[[ScenarioFn], ScenarioFn]:
    """Register a pipeline under a scenario name."""

    def _decorator(fn: ScenarioFn) -> ScenarioFn:
        if name in _REGISTRY:
            raise ValueError(f'Scenario {name!r} is already registered.')
        _REGISTRY[name] = fn
        return fn

    return _decorator


def scenario_names() -> tuple[str, ...]:
    """Names of the registered scenarios."""
    return tuple(sorted(_REGISTRY))


@dataclasses.dataclass(frozen=True)
class Scenario:
    """A named pipeline with its configuration patch and output directory.

    Raises:
        ConfigError: If the name is not a registered scenario.
    """

    name: str
    overrides: tuple[str, ...] = ()
    out: pathlib.Path = pathlib.Path('results')

    def __post_init__(self) -> None:
        if self.name not in _REGISTRY:
            raise ConfigError(
                f'Unknown scenario {self.name!r}; choose one of '
                f'{", ".join(scenario_names())}.',
                key='scenario',
            )
        object.__setattr__(self, 'overrides', tuple(self.overrides))
        object.__setattr__(self, 'out', pathlib.Path(self.out))


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce and verify a scenario run.

    Attributes:
        scenario: Scenario name.
        version: qdraman version.
        config: Flattened resolved configuration.
        overrides: `--set` overrides as given.
        files: Digest of each written file, keyed by its path relative to
            the output directory.
    """

    scenario: str
    version: str
    config: dict[str, Any]
    overrides: tuple[str, ...]
    files: dict[str, str]

    def to_json(self) -> str:
        """Deterministic JSON rendering (sorted keys, no timestamps)."""
        document = dataclasses.asdict(self)
        document['overrides'] = list(self.overrides)
        return json.dumps(document, sort_keys=True, indent=2) + '\n'

    def write(self, directory: pathlib.Path | str) -> pathlib.Path:
        """Write `manifest.json` into `directory`."""
        path = pathlib.Path(directory) / MANIFEST_NAME
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(self.to_json())
        return path

    def verify(self, directory: pathlib.Path | str) -> bool:
        """Check the recorded digests against the files in `directory`."""
        directory = pathlib.Path(directory)
        for name, digest in self.files.items():
            path = directory / name
            if not path.is_file() or file_digest(path) != digest:
                return False
        return True


def run_scenario(
    scenario: Scenario,
    config: pathlib.Path | str | Settings | None = None,
) -> RunManifest:
    """Run a scenario and write its manifest.

    Args:
        scenario: Scenario to run.
        config: Configuration file, already resolved settings, or `None`
            for the defaults. The scenario overrides are applied to files
            and defaults.

    Returns:
        Manifest of the run, also written to the output directory.

    Raises:
        ConfigError: If the configuration or overrides are invalid.
        SimulationError: If a pipeline step fails.
        OracleMismatchError: If the oracle check fails.
    """
    if isinstance(config, Settings):
        if scenario.overrides:
            raise ConfigError(
                'Overrides cannot be applied to resolved settings.',
                key='overrides',
            )
        settings = config
    else:
        settings = load_settings(config, scenario.overrides)

    scenario.out.mkdir(parents=True, exist_ok=True)
    logger.info(f'Running scenario {scenario.name} into {scenario.out}')
    timer = Timer()
    paths = _REGISTRY[scenario.name](ScenarioContext(settings, scenario.out))
    timer.lap('pipeline')

    files = {
        path.relative_to(scenario.out).as_posix(): file_digest(path)
        for path in paths
    }
    manifest = RunManifest(
        scenario=scenario.name,
        version=qdraman.__version__,
        config=settings.flatten(),
        overrides=scenario.overrides,
        files=dict(sorted(files.items())),
    )
    manifest.write(scenario.out)
    timer.lap('manifest')
    logger.debug(f'Scenario {scenario.name} phases: {timer.report()}')
    logger.info(
        f'Scenario {scenario.name} wrote {len(files)} files in '
        f'{timer.stop():.2f} s',
    )
    return manifest


def _steady_model(
    ctx: ScenarioContext,
    params: DeviceParameters,
    levels: LevelStructure,
    laser_energy: float,
    coupling: float | None = None,
) -> tuple[LindbladModel, DensityMatrix]:
    engine = ctx.settings.engine
    model = build_model(
        params,
        levels,
        laser_energy,
        engine.fock_cutoff,
        coupling=coupling,
    )
    steady = steady_state(
        model,
        rcond=engine.rcond,
        fock_guard=engine.fock_guard,
    )
    return model, steady


@register('sidebands_fig2d')
def sidebands_fig2d(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Sideband spectrum with the anti-Stokes line on the cavity."""
    params, levels = ctx.params, ctx.levels
    engine = ctx.settings.engine
    laser = pinned_laser_energy(params, levels, 'antistokes')
    splitting = levels.electron_zeeman
    window = engine.sideband_window

    model, steady = _steady_model(ctx, params, levels, laser)
    solver = EmissionSpectrumSolver(model, steady)
    grid = uniform_grid(laser, splitting + window, engine.spectrum_step)
    spectrum = solver.evaluate(grid)
    paths = [
        write_spectrum_csv(ctx.path('sidebands_engine.csv'), spectrum),
        write_spectrum_csv(
            ctx.path('sidebands_perturbative.csv'),
            sideband_lineshape(laser, params, levels, grid),
        ),
        ctx.write_report('model_report.txt', model.report()),
    ]

    fits = []
    for label, center in (
        ('stokes', laser - splitting),
        ('antistokes', laser + splitting),
    ):
        part = spectrum.window(center - window, center + window)
        fit = fit_lorentzian(part)
        fits.append(fit._replace(model=f'{label}_sideband'))
        log_step(
            logger,
            label,
            center=f'{fit.params["center"]:.3f}',
            shift=f'{fit.params["center"] - laser:+.3f}',
            fwhm=f'{fit.params["fwhm"]:.3f}',
        )
    paths.extend(ctx.write_fits('sideband_fits', fits))

    instrument = ctx.settings.instrument
    fp = FabryPerotFilter(instrument.fp_fwhm, instrument.fp_fsr)
    selected = order_window(spectrum, laser, instrument.fp_fsr)
    scan = fp_scan(selected, fp, grid[::2], single_order=True)
    paths.append(write_spectrum_csv(ctx.path('fp_scan.csv'), scan))
    return paths


@register('excitation_fig3c')
def excitation_fig3c(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Laser scan across both driven transitions."""
    params, levels = ctx.params, ctx.levels
    stokes_pump = levels.stokes_pump.energy
    antistokes_pump = levels.antistokes_pump.energy
    margin = 6 * params.qd_hwhm
    low = min(stokes_pump, antistokes_pump) - margin
    high = max(stokes_pump, antistokes_pump) + margin
    lasers = uniform_grid(
        (low + high) / 2,
        (high - low) / 2,
        ctx.settings.run.laser_step_fine,
    )
    stokes, antistokes = excitation_spectrum(lasers, params, levels)

    fits = []
    for label, spectrum, center in (
        ('stokes', stokes, stokes_pump),
        ('antistokes', antistokes, antistokes_pump),
    ):
        part = spectrum.window(center - margin, center + margin)
        fit = fit_lorentzian(part)
        fits.append(fit._replace(model=f'{label}_resonance'))

    return [
        write_excitation_csv(
            ctx.path('excitation.csv'),
            stokes,
            antistokes,
        ),
        write_spectrum_csv(
            ctx.path('reflectance_markers.csv'),
            reflectance_markers(lasers, params, levels),
        ),
        *ctx.write_fits('resonance_fits', fits),
    ]


@register('asymmetry_fig4a')
def asymmetry_fig4a(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Wide laser scan showing the cavity-induced asymmetry."""
    params, levels = ctx.params, ctx.levels
    half_width = params.qd_center_energy - params.cavity_energy
    half_width = abs(half_width) + levels.electron_zeeman + 2 * params.kappa
    lasers = uniform_grid(
        params.qd_center_energy,
        half_width,
        ctx.settings.run.laser_step_coarse,
    )
    stokes, antistokes = excitation_spectrum(lasers, params, levels)
    splitting = levels.electron_zeeman
    fits = [
        fit_cavity_raman(
            stokes.grid,
            stokes.values,
            -splitting,
            cavity_center=params.cavity_energy,
            cavity_fwhm=params.kappa,
        )._replace(model='stokes_cavity_raman'),
        fit_cavity_raman(
            antistokes.grid,
            antistokes.values,
            splitting,
            cavity_center=params.cavity_energy,
            cavity_fwhm=params.kappa,
        )._replace(model='antistokes_cavity_raman'),
    ]
    return [
        write_excitation_csv(ctx.path('excitation.csv'), stokes, antistokes),
        *ctx.write_fits('cavity_raman_fits', fits),
    ]


@register('ratio_fig4b')
def ratio_fig4b(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Raman emission at equal red and blue laser detunings."""
    params, levels = ctx.params, ctx.levels
    detuning = ctx.settings.run.asymmetry_detuning
    center = params.qd_center_energy
    red = raman_intensities(center - detuning, params, levels)
    blue = raman_intensities(center + detuning, params, levels)
    ratio = asymmetry_ratio(detuning, params, levels)
    logger.info(
        f'Asymmetry ratio at +/-{detuning:g} ueV: {ratio:.2f} '
        f'(Stokes only {red.stokes / blue.stokes:.2f})',
    )

    rows: list[Sequence[CellT]] = [
        ('red', red.laser_energy, red.stokes, red.antistokes),
        ('blue', blue.laser_energy, blue.stokes, blue.antistokes),
    ]
    paths = [
        write_csv(
            ctx.path('ratio.csv'),
            ('side', 'laser_ueV', 'I_S', 'I_AS'),
            rows,
            comment=f'asymmetry_ratio={ratio:.12e}',
        ),
    ]
    for side, laser in (
        ('red', red.laser_energy),
        ('blue', blue.laser_energy),
    ):
        paths.append(
            write_spectrum_csv(
                ctx.path(f'sidebands_{side}.csv'),
                sideband_lineshape(
                    laser,
                    params,
                    levels,
                    step=ctx.settings.engine.spectrum_step,
                    window=ctx.settings.engine.sideband_window,
                ),
            ),
        )
    return paths


def g2_device(settings: Settings) -> tuple[DeviceParameters, float]:
    """Device and coupling of the antibunching measurement.

    The field and cavity detuning come from the run settings and the
    spin-flip rate is set so the spin relaxes at the configured rise
    time. The coupling is calibrated on the base device.
    """
    base = settings.device
    coupling = resolve_coupling(
        base,
        build_level_structure(base),
        settings.engine.fock_cutoff,
    )
    run = settings.run
    device = base.replace(
        magnetic_field=run.g2_field,
        cavity_energy=base.qd_center_energy + run.g2_cavity_detuning,
        spin_flip_rate=HBAR / (2 * run.g2_rise_time),
        qd_cavity_coupling=coupling,
    )
    return device, coupling


@register('g2_fig4c')
def g2_fig4c(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Antibunching of the Stokes emission."""
    run = ctx.settings.run
    params, coupling = g2_device(ctx.settings)
    levels = build_level_structure(params)
    pump = levels.stokes_pump.number
    laser = dressed_transition(
        params,
        levels,
        pump,
        coupling,
        ctx.settings.engine.fock_cutoff,
    ).energy

    model, steady = _steady_model(ctx, params, levels, laser, coupling)
    delays = run.g2_step * numpy.arange(
        int(round(run.g2_max_delay / run.g2_step)) + 1,
    )
    trace = g2(model, delays, steady)
    detector = DetectorResponse(ctx.settings.instrument.detector_width)
    convolved = convolve_g2(trace, detector)
    fit = fit_g2_rise(convolved, detector.width)
    logger.info(
        f'g2(0) = {trace.values[0]:.4f} raw, {convolved.values[0]:.4f} '
        f'convolved; rise time {fit.params["t_rise"]:.1f} ps',
    )
    return [
        write_trace_csv(ctx.path('g2_raw.csv'), trace),
        write_trace_csv(ctx.path('g2_convolved.csv'), convolved),
        ctx.write_report('model_report.txt', model.report()),
        *ctx.write_fits('g2_fit', [fit]),
    ]


@register('selectivity_fig5b')
def selectivity_fig5b(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Spin selectivity against field with the anti-Stokes line pinned."""
    params = ctx.params
    run = ctx.settings.run
    count = int(round((run.field_max - run.field_min) / run.field_step)) + 1
    fields = run.field_min + run.field_step * numpy.arange(count)
    values = selectivity_sweep(
        fields,
        params,
        'antistokes',
        workers=run.workers,
    )
    splittings = [
        build_level_structure(params.replace(magnetic_field=b)).electron_zeeman
        for b in fields
    ]

    fine = numpy.linspace(0.0, run.field_max, 10 * count + 1)
    curve = selectivity_sweep(fine, params, 'antistokes', workers=run.workers)
    return [
        write_csv(
            ctx.path('selectivity.csv'),
            ('B_T', 'E_z_ueV', 'selectivity'),
            zip(fields, splittings, values),
        ),
        write_csv(
            ctx.path('selectivity_model.csv'),
            ('B_T', 'selectivity'),
            zip(fine, curve),
        ),
    ]


@register('spin_resolved_fig5de')
def spin_resolved_fig5de(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Raman emission after pumping the spin into each eigenstate."""
    params, levels = ctx.params, ctx.levels
    settings = ctx.settings
    engine = settings.engine
    run = settings.run
    laser = pinned_laser_energy(params, levels, 'antistokes')
    coupling = resolve_coupling(params, levels, engine.fock_cutoff)

    targets = {
        'down': levels.stokes_pump.number,
        'up': levels.antistokes_pump.number,
    }

    def prepare(spin: str) -> SpinState:
        return pump_spin(
            params,
            levels,
            targets[spin],
            run.pump_duration,
            relaxation=settings.relaxation,
            pump_rabi=run.pump_rabi,
            fock_cutoff=engine.fock_cutoff,
            coupling=coupling,
        )

    spins = ('down', 'up')
    states = dict(zip(spins, ctx.map(prepare, spins)))
    options = dict(
        fock_cutoff=engine.fock_cutoff,
        coupling=coupling,
        window=engine.sideband_window,
        step=engine.spectrum_step,
    )

    def emit(spin: str) -> SidebandSpectra:
        if spin == 'mixed':
            return randomized_spin_raman(
                params,
                levels,
                laser,
                relaxation=settings.relaxation,
                **options,
            )
        return spin_resolved_raman(
            params,
            levels,
            states[spin],
            laser,
            relaxation=settings.relaxation,
            pump_rabi=run.pump_rabi,
            **options,
        )

    labels = ('down', 'up', 'mixed')
    results = dict(zip(labels, ctx.map(emit, labels)))

    paths = []
    rows: list[Sequence[CellT]] = []
    for spin in labels:
        spectra = results[spin]
        for side in ('stokes', 'antistokes'):
            paths.append(
                write_spectrum_csv(
                    ctx.path(f'spin_{spin}_{side}.csv'),
                    getattr(spectra, side),
                    comment=f'spin={spin}',
                ),
            )
        fidelity = states[spin].fidelity(spin) if spin in states else 0.5
        rows.append(
            (
                spin,
                fidelity,
                spectra.stokes.integrate(),
                spectra.antistokes.integrate(),
            ),
        )
    paths.append(
        write_csv(
            ctx.path('spin_contrast.csv'),
            ('spin', 'fidelity', 'I_S', 'I_AS'),
            rows,
        ),
    )
    return paths


def oracle_ratios(
    settings: Settings,
    workers: int | None = None,
) -> list[tuple[float, float, float]]:
    """Engine and perturbative anti-Stokes/Stokes ratios over the scan.

    The engine runs in the weak-coupling regime with the configured
    oracle coupling and the laser at E_X ± 200..600 μeV.

    Returns:
        `(laser, engine_ratio, perturbative_ratio)` per laser energy.
    """
    run = settings.run
    engine = settings.engine
    params = settings.device.replace(qd_cavity_coupling=run.oracle_coupling)
    levels = build_level_structure(params)
    splitting = levels.electron_zeeman
    center = params.qd_center_energy
    offsets = (-600, -500, -400, -300, -200, 200, 300, 400, 500, 600)

    def evaluate(offset: int) -> tuple[float, float, float]:
        laser = center + offset
        model = build_model(
            params,
            levels,
            laser,
            engine.fock_cutoff,
            coupling=run.oracle_coupling,
        )
        steady = steady_state(
            model,
            rcond=engine.rcond,
            fock_guard=engine.fock_guard,
        )
        solver = EmissionSpectrumSolver(model, steady)
        window = engine.sideband_window
        step = engine.spectrum_step
        stokes = solver.evaluate(uniform_grid(laser - splitting, window, step))
        antistokes = solver.evaluate(
            uniform_grid(laser + splitting, window, step),
        )
        merged = Spectrum(
            numpy.concatenate([stokes.grid, antistokes.grid]),
            numpy.concatenate([stokes.values, antistokes.values]),
        )
        s, a_s = sideband_weights(merged, laser, splitting, window)
        expected = raman_intensities(laser, params, levels)
        log_step(logger, offset, engine=f'{a_s / s:.4g}')
        return laser, a_s / s, expected.antistokes / expected.stokes

    with concurrent.futures.ThreadPoolExecutor(workers) as pool:
        return list(pool.map(evaluate, offsets))


@register('oracle_check')
def oracle_check(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Compare the engine with the perturbative model at weak coupling."""
    tolerance = ctx.settings.run.oracle_tolerance
    results = oracle_ratios(ctx.settings, ctx.settings.run.workers)
    deviations = [engine / expected - 1 for _, engine, expected in results]
    rms = float(numpy.sqrt(numpy.mean(numpy.square(deviations))))
    path = write_csv(
        ctx.path('oracle.csv'),
        ('laser_ueV', 'engine_ratio', 'perturbative_ratio', 'deviation'),
        [(*result, dev) for result, dev in zip(results, deviations)],
        comment=f'rms={rms:.12e} tolerance={tolerance:.12e}',
    )
    logger.info(f'Oracle RMS relative deviation {rms:.3%}')
    if rms > tolerance:
        raise OracleMismatchError(rms, tolerance)
    return [path]


@register('tuning_fig3ab')
def tuning_fig3ab(ctx: ScenarioContext) -> list[pathlib.Path]:
    """Sideband energies and intensities while the laser tunes."""
    params, levels = ctx.params, ctx.levels
    count = int(round(TUNING_RANGE_GHZ / TUNING_STEP_GHZ)) + 1
    lasers = params.qd_center_energy + ghz_to_uev(
        numpy.linspace(-TUNING_RANGE_GHZ / 2, TUNING_RANGE_GHZ / 2, count),
    )
    points = ctx.map(
        lambda laser: raman_intensities(float(laser), params, levels),
        lasers,
    )
    return [
        write_csv(
            ctx.path('tuning.csv'),
            ('laser_ueV', 'stokes_ueV', 'antistokes_ueV', 'I_S', 'I_AS'),
            [
                (
                    p.laser_energy,
                    p.stokes_energy,
                    p.antistokes_energy,
                    p.stokes,
                    p.antistokes,
                )
                for p in points
            ],
        ),
    ]
