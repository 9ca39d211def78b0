"""Error and warning types raised by qdraman."""

from __future__ import annotations


class QDRamanError(Exception):
    """Base class for all qdraman errors."""


class ParameterError(QDRamanError, ValueError):
    """A parameter record holds an invalid value.

    Args:
        key: Name of the offending field.
        message: Description of the violated constraint.
    """

    def __init__(self, key: str, message: str) -> None:
        super().__init__(message)
        self.key = key


class ConfigError(QDRamanError, ValueError):
    """A configuration source is invalid.

    Args:
        message: Description of the problem.
        key: Dotted key path of the offending entry.
        line: 1-based line of the entry in the source file, if known.
        source: Name of the configuration source (file path or `--set`).
    """

    def __init__(
        self,
        message: str,
        *,
        key: str | None = None,
        line: int | None = None,
        source: str | None = None,
    ) -> None:
        self.key = key
        self.line = line
        self.source = source
        location = []
        if source is not None:
            location.append(source)
        if line is not None:
            location.append(f'line {line}')
        if key is not None:
            location.append(f'key {key!r}')
        prefix = f'[{", ".join(location)}] ' if location else ''
        super().__init__(f'{prefix}{message}')


class SimulationError(QDRamanError, RuntimeError):
    """A simulation step failed.

    Args:
        message: Description of the failure.
        module: Name of the model tier that raised the error.
    """

    module = 'qdraman'

    def __init__(self, message: str, *, module: str | None = None) -> None:
        super().__init__(message)
        if module is not None:
            self.module = module


class SolverError(SimulationError):
    """The time integrator or a linear solve did not succeed."""

    module = 'lindblad_engine'


class NonUniqueSteadyStateError(SimulationError):
    """The Liouvillian has more than one stationary state."""

    module = 'lindblad_engine'


class TruncationError(SimulationError):
    """The Fock cutoff is too small for the requested drive."""

    module = 'lindblad_engine'


class PhysicsInvariantError(SimulationError):
    """A computed state violates a physical invariant."""

    module = 'lindblad_engine'


class CalibrationError(SimulationError):
    """The requested linewidth cannot be reached by the coupling."""

    module = 'lindblad_engine'


class CorrelationError(SimulationError):
    """A correlation function is undefined for the given state."""

    module = 'lindblad_engine'


class UndefinedSelectivityError(SimulationError):
    """Neither sideband emits so the spin selectivity is undefined."""

    module = 'perturbative_raman'


class FitError(SimulationError):
    """A least-squares fit did not converge.

    Args:
        message: Description of the failure.
        residual_norm: Residual norm at the last iterate.
    """

    module = 'instrument_chain'

    def __init__(self, message: str, *, residual_norm: float) -> None:
        super().__init__(f'{message} Residual norm: {residual_norm:.6g}.')
        self.residual_norm = residual_norm


class OracleMismatchError(QDRamanError):
    """The engine disagrees with the perturbative oracle.

    Args:
        rms: Root-mean-square relative deviation over the scan.
        tolerance: Accepted deviation.
    """

    def __init__(self, rms: float, tolerance: float) -> None:
        super().__init__(
            f'RMS relative deviation between the engine and the perturbative '
            f'model is {rms:.4%}, above the tolerance of {tolerance:.4%}.',
        )
        self.rms = rms
        self.tolerance = tolerance


class IneffectivePumpingWarning(UserWarning):
    """Spin flips outpace optical pumping so initialization is incomplete."""
