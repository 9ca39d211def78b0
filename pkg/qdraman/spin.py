"""Spin initialization, relaxation and spin-resolved Raman emission.

Two tiers describe optical pumping. The engine tier evolves the full
dot-cavity master equation with the pump laser on a cross-polarized leg.
The rate tier reduces each driven leg to a saturated two-level system and
solves the resulting two-state rate equation in closed form.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from typing import Literal
from typing import NamedTuple

import numpy

from qdraman.device import BASE_T1
from qdraman.device import DeviceParameters
from qdraman.device import LevelStructure
from qdraman.device import PLATEAU_EDGE_FACTOR
from qdraman.device import Spin
from qdraman.device import Transition
from qdraman.engine.calibrate import dressed_transition
from qdraman.engine.calibrate import resolve_coupling
from qdraman.engine.correlation import EmissionSpectrumSolver
from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.model import build_model
from qdraman.engine.model import CollapseChannel
from qdraman.engine.model import LindbladModel
from qdraman.engine.solvers import DensityMatrix
from qdraman.engine.solvers import evolve
from qdraman.exceptions import IneffectivePumpingWarning
from qdraman.exceptions import ParameterError
from qdraman.instrument import cavity_factor
from qdraman.spectrum import Spectrum
from qdraman.spectrum import uniform_grid
from qdraman.units import lifetime_to_rate
from qdraman.units import ps_to_internal
from qdraman.units import purcell_rate

logger = logging.getLogger(__name__)

Regime = Literal['plateau-edge', 'plateau-center']

PROBABILITY_TOL = 1e-12
MIN_PUMP_FIDELITY = 0.99


def _other(spin: Spin) -> Spin:
    return 'down' if spin == 'up' else 'up'


@dataclasses.dataclass(frozen=True)
class SpinState:
    """Ground-doublet state of the resident electron.

    Attributes:
        p_up: Population of spin up.
        p_down: Population of spin down.
        coherence: Off-diagonal element <up|ρ|down>.
    """

    p_up: float
    p_down: float
    coherence: complex = 0j

    def __post_init__(self) -> None:
        for name in ('p_up', 'p_down'):
            value = getattr(self, name)
            if not -PROBABILITY_TOL <= value <= 1 + PROBABILITY_TOL:
                raise ParameterError(
                    name,
                    f'{name} must lie in [0, 1] but got {value}.',
                )
        if abs(self.p_up + self.p_down - 1) > PROBABILITY_TOL:
            raise ParameterError(
                'p_up',
                'Spin populations must sum to 1 but got '
                f'{self.p_up} + {self.p_down}.',
            )
        if abs(self.coherence) ** 2 > (
            self.p_up * self.p_down + PROBABILITY_TOL
        ):
            raise ParameterError(
                'coherence',
                f'Spin coherence {self.coherence} exceeds the bound set by '
                'the populations.',
            )

    @classmethod
    def mixed(cls) -> SpinState:
        """Unpolarized spin."""
        return cls(0.5, 0.5)

    @classmethod
    def up(cls) -> SpinState:
        """Pure spin up."""
        return cls(1.0, 0.0)

    @classmethod
    def down(cls) -> SpinState:
        """Pure spin down."""
        return cls(0.0, 1.0)

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> SpinState:
        """Ground-doublet state of a dot-cavity density matrix.

        Photon numbers are traced out and the trion population is
        excluded by renormalizing over the ground doublet.
        """
        space = rho.space
        up = rho.population('up')
        down = rho.population('down')
        total = up + down
        if not total > 0:
            raise ParameterError(
                'rho',
                'Density matrix has no ground-state population.',
            )
        coherence = rho.expect(space.qd_transition('down', 'up')) / total
        p_up = min(max(up / total, 0.0), 1.0)
        p_down = 1.0 - p_up
        bound = math.sqrt(p_up * p_down)
        if abs(coherence) > bound:
            coherence = coherence * bound / abs(coherence)
        return cls(p_up, p_down, coherence)

    @property
    def polarization(self) -> float:
        """Spin polarization p_up - p_down."""
        return self.p_up - self.p_down

    def fidelity(self, spin: Spin) -> float:
        """Overlap with the pure state `spin`."""
        return self.p_up if spin == 'up' else self.p_down

    def density(self, space: HilbertSpace) -> numpy.ndarray:
        """Density matrix of the spin with the cavity in vacuum."""
        rho = numpy.zeros((space.total_dim, space.total_dim), dtype=complex)
        up = space.index('up', 0)
        down = space.index('down', 0)
        rho[up, up] = self.p_up
        rho[down, down] = self.p_down
        rho[up, down] = self.coherence
        rho[down, up] = numpy.conj(self.coherence)
        return rho


@dataclasses.dataclass(frozen=True)
class RelaxationModel:
    """Temperature dependent spin T1 and co-tunneling flip rates.

    Attributes:
        t1_points: `(temperature K, T1 ps)` pairs with increasing
            temperature. T1 is interpolated log-linearly between them.
        temperature: Operating temperature (K).
        edge_factor: Speed-up of spin flips at the charge-plateau edge.
        regime: Default co-tunneling regime.
    """

    t1_points: tuple[tuple[float, float], ...] = (
        (5.2, BASE_T1),
        (16.0, 7.0e4),
    )
    temperature: float = 5.2
    edge_factor: float = PLATEAU_EDGE_FACTOR
    regime: Regime = 'plateau-center'

    def __post_init__(self) -> None:
        points = tuple(
            (float(t), float(t1)) for t, t1 in self.t1_points
        )
        if len(points) < 2:
            raise ParameterError(
                't1_points',
                'At least two (temperature, T1) points are required.',
            )
        temperatures = [t for t, _ in points]
        if any(b <= a for a, b in zip(temperatures, temperatures[1:])):
            raise ParameterError(
                't1_points',
                f'Temperatures must increase but got {temperatures}.',
            )
        if any(not t1 > 0 for _, t1 in points):
            raise ParameterError(
                't1_points',
                'T1 must be positive at every point.',
            )
        if not self.edge_factor >= 1:
            raise ParameterError(
                'edge_factor',
                f'edge_factor must be at least 1 but got {self.edge_factor}.',
            )
        if self.regime not in ('plateau-edge', 'plateau-center'):
            raise ParameterError(
                'regime',
                "regime must be 'plateau-edge' or 'plateau-center' but got "
                f'{self.regime!r}.',
            )
        object.__setattr__(self, 't1_points', points)
        try:
            interpolate_t1(self.temperature, self)
        except ValueError as e:
            raise ParameterError('temperature', str(e)) from e

    def t1(self) -> float:
        """T1 (ps) at the operating temperature."""
        return interpolate_t1(self.temperature, self)

    def rate(self, regime: Regime | None = None) -> float:
        """Co-tunneling flip rate Γ_ct (μeV) in each direction.

        In the plateau center the population relaxes at 1/T1, so each
        direction flips at HBAR/(2 T1).
        """
        regime = self.regime if regime is None else regime
        center = lifetime_to_rate(2 * self.t1())
        if regime == 'plateau-edge':
            return center * self.edge_factor
        return center


def interpolate_t1(temperature: float, model: RelaxationModel) -> float:
    """Spin T1 at a temperature.

    Args:
        temperature: Temperature (K) within the tabulated span.
        model: Relaxation model holding the tabulated points.

    Returns:
        T1 (ps), interpolated linearly in log T1.

    Raises:
        ValueError: If `temperature` lies outside the tabulated span.
    """
    temperatures = numpy.array([t for t, _ in model.t1_points])
    t1s = numpy.array([t1 for _, t1 in model.t1_points])
    if not temperatures[0] <= temperature <= temperatures[-1]:
        raise ValueError(
            f'Temperature {temperature} K lies outside the tabulated span '
            f'[{temperatures[0]}, {temperatures[-1]}] K.',
        )
    log_t1 = numpy.interp(temperature, temperatures, numpy.log(t1s))
    return float(numpy.exp(log_t1))


class PumpingRates(NamedTuple):
    """Optical pumping rates out of each spin state (μeV)."""

    from_up: float
    """Rate up -> down."""
    from_down: float
    """Rate down -> up."""

    def out_of(self, spin: Spin) -> float:
        """Rate out of `spin`."""
        return self.from_up if spin == 'up' else self.from_down


def _pumping_leg(levels: LevelStructure, ground: Spin) -> Transition:
    for number in levels.cross_polarized_legs:
        transition = levels.transition(number)
        if transition.ground == ground:
            return transition
    raise AssertionError('Every spin has one cross-polarized leg.')


def _decay_to_other_ground(
    params: DeviceParameters,
    levels: LevelStructure,
    transition: Transition,
    coupling: float,
    decay: float,
) -> float:
    trion = transition.trion
    same = transition.ground
    other = _other(same)
    moments = {
        spin: params.dipoles.moment(trion, spin) for spin in (same, other)
    }
    total = sum(m**2 for m in moments.values())
    branch = 0.5 if total == 0 else moments[other] ** 2 / total

    cavity = {}
    for spin in (same, other):
        leg = levels.leg(trion, spin)
        leg_coupling = coupling * moments[spin]
        leg_coupling *= math.sqrt(
            cavity_factor(leg.role, params.polarization_mixing_angle),
        )
        cavity[spin] = purcell_rate(
            leg_coupling,
            params.kappa,
            leg.energy - params.cavity_energy,
        )
    cavity_total = cavity[same] + cavity[other]
    share = 0.0 if cavity_total == 0 else cavity[other] / cavity_total
    purcell = max(decay - params.radiative_rate, 0.0)
    return params.radiative_rate * branch + purcell * share


def pumping_rates(
    params: DeviceParameters,
    levels: LevelStructure,
    laser_energy: float,
    rabi: float,
    coupling: float,
) -> PumpingRates:
    """Rate-equation pumping rates of a laser on the cross-polarized legs.

    Each cross leg is a two-level system with the cavity-dressed energy,
    coherence width Γ₂ and trion decay Γ_T. Its steady trion population
    relative to the ground state is s / (1 - s) with

        s = (Ω²/4)(Γ₂/Γ_T) / (Δ² + Γ₂² + Ω² Γ₂/Γ_T),

    and the pumping rate is that ratio times the trion decay into the
    other ground state.

    Args:
        params: Device parameters.
        levels: Level structure of `params`.
        laser_energy: Pump laser energy (μeV).
        rabi: Pump Rabi energy Ω (μeV).
        coupling: Dot-cavity coupling g_c (μeV).

    Returns:
        Pumping rates out of each spin state.
    """
    rates = {}
    for spin in ('up', 'down'):
        transition = _pumping_leg(levels, spin)  # type: ignore[arg-type]
        dressed = dressed_transition(
            params,
            levels,
            transition.number,
            coupling,
        )
        moment = params.dipoles.moment(transition.trion, transition.ground)
        omega = rabi * moment
        gamma2 = dressed.fwhm / 2
        decay = dressed.decay
        detuning = laser_energy - dressed.energy
        saturation = omega**2 * gamma2 / decay
        s = (saturation / 4) / (detuning**2 + gamma2**2 + saturation)
        out = _decay_to_other_ground(
            params,
            levels,
            transition,
            coupling,
            decay,
        )
        rates[spin] = s / (1 - s) * out
    return PumpingRates(from_up=rates['up'], from_down=rates['down'])


def _rate_solution(
    initial: SpinState,
    rates: PumpingRates,
    flip_rate: float,
    dephasing: float,
    duration: float,
) -> SpinState:
    up_to_down = rates.from_up + flip_rate
    down_to_up = rates.from_down + flip_rate
    total = up_to_down + down_to_up
    t = ps_to_internal(duration)
    if total == 0:
        p_up = initial.p_up
    else:
        asymptote = down_to_up / total
        p_up = asymptote + (initial.p_up - asymptote) * math.exp(-total * t)
    coherence_decay = dephasing + flip_rate
    coherence_decay += (rates.from_up + rates.from_down) / 2
    coherence = initial.coherence * math.exp(-coherence_decay * t)
    p_up = min(max(p_up, 0.0), 1.0)
    p_down = 1.0 - p_up
    bound = math.sqrt(p_up * p_down)
    if abs(coherence) > bound:
        coherence = coherence * bound / abs(coherence)
    return SpinState(p_up, p_down, coherence)


def _check_pump_transition(levels: LevelStructure, number: int) -> Transition:
    transition = levels.transition(number)
    if transition.role != 'cross':
        raise ParameterError(
            'pump_transition',
            f'Transition {number} is cavity-coupled; pump one of the '
            f'cross-polarized transitions {levels.cross_polarized_legs}.',
        )
    return transition


def pump_spin(
    params: DeviceParameters,
    levels: LevelStructure,
    pump_transition: int,
    duration: float,
    initial: SpinState | None = None,
    relaxation: RelaxationModel | None = None,
    pump_rabi: float = 3.0,
    method: Literal['engine', 'rates'] = 'engine',
    *,
    fock_cutoff: int = 2,
    coupling: float | None = None,
) -> SpinState:
    """Initialize the spin by optical pumping.

    The pump laser sits on the dressed energy of `pump_transition` and
    empties its ground state into the other spin, against co-tunneling
    flips at the rate of `relaxation`.

    Args:
        params: Device parameters; its flip rate and Rabi energy are
            replaced by those of the pumping configuration.
        levels: Level structure of `params`.
        pump_transition: Number of a cross-polarized transition.
        duration: Pump duration (ps).
        initial: State before pumping; unpolarized by default.
        relaxation: Relaxation model; plateau center at 5.2 K by default.
        pump_rabi: Pump Rabi energy (μeV).
        method: `'engine'` evolves the master equation, `'rates'` uses
            the closed-form rate equation.
        fock_cutoff: Photon-number cutoff of the engine.
        coupling: Dot-cavity coupling; resolved from `params` by default.

    Returns:
        Spin state at the end of the pulse.

    Warns:
        IneffectivePumpingWarning: If the rate-tier steady-state fidelity
            is below 0.99, typically at the plateau edge.
    """
    if not duration >= 0:
        raise ValueError(f'Duration must be non-negative but got {duration}.')
    transition = _check_pump_transition(levels, pump_transition)
    target = _other(transition.ground)
    initial = SpinState.mixed() if initial is None else initial
    relaxation = RelaxationModel() if relaxation is None else relaxation
    if coupling is None:
        coupling = resolve_coupling(params, levels, fock_cutoff)

    flip_rate = relaxation.rate()
    pumping = params.replace(spin_flip_rate=flip_rate, drive_rabi=pump_rabi)
    energy = dressed_transition(
        pumping,
        levels,
        pump_transition,
        coupling,
        fock_cutoff,
    ).energy
    rates = pumping_rates(pumping, levels, energy, pump_rabi, coupling)

    limit = _rate_solution(
        SpinState.mixed(),
        rates,
        flip_rate,
        params.spin_dephasing_rate,
        math.inf,
    )
    if limit.fidelity(target) < MIN_PUMP_FIDELITY:
        warnings.warn(
            f'Pumping transition {pump_transition} reaches a spin-{target} '
            f'fidelity of only {limit.fidelity(target):.3f}: pump rate '
            f'{rates.out_of(transition.ground):.3g} ueV against a flip rate '
            f'of {flip_rate:.3g} ueV ({relaxation.regime}).',
            IneffectivePumpingWarning,
            stacklevel=2,
        )

    if duration == 0:
        return initial
    if method == 'rates':
        return _rate_solution(
            initial,
            rates,
            flip_rate,
            params.spin_dephasing_rate,
            duration,
        )
    if method != 'engine':
        raise ValueError(f'Unknown pumping method {method!r}.')

    model = build_model(
        pumping,
        levels,
        energy,
        fock_cutoff,
        coupling=coupling,
    )
    rho0 = DensityMatrix(initial.density(model.space), model.space)
    final = evolve(model, rho0, [0.0, duration], method='propagator')[-1]
    state = SpinState.from_density(final)
    logger.debug(
        f'Pumped transition {pump_transition} for {duration:.0f} ps: '
        f'spin-{target} fidelity {state.fidelity(target):.4f}',
    )
    return state


class SidebandSpectra(NamedTuple):
    """Emission spectra in the Stokes and anti-Stokes windows."""

    stokes: Spectrum
    """Window around ω_L - E_z_e."""
    antistokes: Spectrum
    """Window around ω_L + E_z_e."""


def _sideband_spectra(
    model: LindbladModel,
    window: float,
    step: float,
) -> SidebandSpectra:
    solver = EmissionSpectrumSolver(model)
    splitting = model.levels.electron_zeeman
    laser = model.laser_energy
    return SidebandSpectra(
        stokes=solver.evaluate(uniform_grid(laser - splitting, window, step)),
        antistokes=solver.evaluate(
            uniform_grid(laser + splitting, window, step),
        ),
    )


def spin_resolved_raman(
    params: DeviceParameters,
    levels: LevelStructure,
    init: SpinState,
    laser_energy: float,
    *,
    relaxation: RelaxationModel | None = None,
    pump_rabi: float = 3.0,
    fock_cutoff: int = 2,
    coupling: float | None = None,
    window: float = 30.0,
    step: float = 0.1,
) -> SidebandSpectra:
    """Raman emission conditioned on an initialized spin.

    For each pure spin the engine model gains a `spin_clamp` channel that
    re-pumps the other spin at the rate-tier pumping rate, standing in for
    the initialization laser. The spectra are mixed linearly with the
    populations of `init`; its coherence is not used.

    Args:
        params: Device parameters.
        levels: Level structure of `params`.
        init: Initialized spin state.
        laser_energy: Laser energy (μeV).
        relaxation: Relaxation model; plateau center by default.
        pump_rabi: Rabi energy of the initialization laser (μeV).
        fock_cutoff: Photon-number cutoff of the engine.
        coupling: Dot-cavity coupling; resolved from `params` by default.
        window: Half width of each sideband window (μeV).
        step: Grid spacing (μeV).

    Returns:
        Stokes and anti-Stokes window spectra.
    """
    assert params.cavity_hwhm is not None
    if 2 * levels.electron_zeeman <= params.cavity_hwhm:
        logger.warning(
            f'Sideband separation 2 E_z = {2 * levels.electron_zeeman:.1f} '
            f'ueV does not exceed the cavity half width '
            f'{params.cavity_hwhm:.1f} ueV; the cavity selects both '
            'sidebands.',
        )
    relaxation = RelaxationModel() if relaxation is None else relaxation
    device = params.replace(spin_flip_rate=relaxation.rate('plateau-center'))
    if coupling is None:
        coupling = resolve_coupling(params, levels, fock_cutoff)
    base = build_model(
        device,
        levels,
        laser_energy,
        fock_cutoff,
        coupling=coupling,
    )

    spectra: dict[str, SidebandSpectra] = {}
    for spin, weight in (('up', init.p_up), ('down', init.p_down)):
        if weight == 0:
            continue
        other = _other(spin)  # type: ignore[arg-type]
        leg = _pumping_leg(levels, other)
        energy = dressed_transition(
            device,
            levels,
            leg.number,
            coupling,
            fock_cutoff,
        ).energy
        rate = pumping_rates(device, levels, energy, pump_rabi, coupling)
        clamp = CollapseChannel(
            'spin_clamp',
            base.space.qd_transition(spin, other),
            rate.out_of(other),
        )
        spectra[spin] = _sideband_spectra(
            base.with_channels(clamp),
            window,
            step,
        )
        logger.debug(
            f'Spin-{spin} clamp at {clamp.rate:.3g} ueV: S '
            f'{spectra[spin].stokes.integrate():.4g}, AS '
            f'{spectra[spin].antistokes.integrate():.4g}',
        )

    def combine(side: str) -> Spectrum:
        parts = [
            (weight, getattr(spectra[spin], side))
            for spin, weight in (('up', init.p_up), ('down', init.p_down))
            if spin in spectra
        ]
        grid = parts[0][1].grid
        values = sum(weight * spectrum.values for weight, spectrum in parts)
        return Spectrum(grid, values)

    return SidebandSpectra(
        stokes=combine('stokes'),
        antistokes=combine('antistokes'),
    )


def randomized_spin_raman(
    params: DeviceParameters,
    levels: LevelStructure,
    laser_energy: float,
    *,
    relaxation: RelaxationModel | None = None,
    fock_cutoff: int = 2,
    coupling: float | None = None,
    window: float = 30.0,
    step: float = 0.1,
) -> SidebandSpectra:
    """Raman emission with the spin randomized by plateau-edge co-tunneling.

    Args:
        params: Device parameters.
        levels: Level structure of `params`.
        laser_energy: Laser energy (μeV).
        relaxation: Relaxation model supplying the plateau-edge rate.
        fock_cutoff: Photon-number cutoff of the engine.
        coupling: Dot-cavity coupling; resolved from `params` by default.
        window: Half width of each sideband window (μeV).
        step: Grid spacing (μeV).

    Returns:
        Stokes and anti-Stokes window spectra of the steady state.
    """
    relaxation = RelaxationModel() if relaxation is None else relaxation
    device = params.replace(spin_flip_rate=relaxation.rate('plateau-edge'))
    if coupling is None:
        coupling = resolve_coupling(params, levels, fock_cutoff)
    model = build_model(
        device,
        levels,
        laser_energy,
        fock_cutoff,
        coupling=coupling,
    )
    return _sideband_spectra(model, window, step)
