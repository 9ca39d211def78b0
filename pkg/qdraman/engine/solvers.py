"""Steady-state and time-domain solutions of a Lindblad model."""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence
from typing import Literal

import numpy
import scipy.integrate
import scipy.linalg

from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.hilbert import trace_functional
from qdraman.engine.hilbert import unvec
from qdraman.engine.hilbert import vec
from qdraman.engine.model import LindbladModel
from qdraman.exceptions import NonUniqueSteadyStateError
from qdraman.exceptions import PhysicsInvariantError
from qdraman.exceptions import SolverError
from qdraman.exceptions import TruncationError
from qdraman.units import internal_to_ps
from qdraman.units import ps_to_internal

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix on a dot-cavity Hilbert space.

    Construction checks Hermiticity, unit trace and positivity and stores
    the Hermitian part of `matrix`.

    Raises:
        PhysicsInvariantError: If any of the checks fails.
    """

    matrix: numpy.ndarray
    space: HilbertSpace
    trace_tol: float = TRACE_TOL

    def __post_init__(self) -> None:
        rho = numpy.asarray(self.matrix, dtype=complex)
        dim = self.space.total_dim
        if rho.shape != (dim, dim):
            raise PhysicsInvariantError(
                f'Density matrix has shape {rho.shape} but the Hilbert '
                f'space has dimension {dim}.',
            )
        skew = float(numpy.max(numpy.abs(rho - rho.conj().T)))
        if skew > HERMITIAN_TOL:
            raise PhysicsInvariantError(
                f'Density matrix is not Hermitian (max deviation {skew:.2e}).',
            )
        trace = complex(numpy.trace(rho))
        if abs(trace - 1) > self.trace_tol:
            raise PhysicsInvariantError(
                f'Density matrix trace is {trace:.12g}, not 1.',
            )
        rho = 0.5 * (rho + rho.conj().T)
        lowest = float(numpy.linalg.eigvalsh(rho)[0])
        if lowest < -EIGENVALUE_TOL:
            raise PhysicsInvariantError(
                f'Density matrix has negative eigenvalue {lowest:.3e}.',
            )
        rho.setflags(write=False)
        object.__setattr__(self, 'matrix', rho)

    def expect(self, operator: numpy.ndarray) -> complex:
        """Expectation value Tr[O ρ]."""
        return complex(numpy.trace(operator @ self.matrix))

    def population(self, level: str) -> float:
        """Population of a dot level summed over photon numbers."""
        return self.expect(self.space.projector(level)).real

    def fock_population(self, photons: int) -> float:
        """Population of a photon number summed over dot levels."""
        return self.expect(self.space.fock_projector(photons)).real

    def photon_number(self) -> float:
        """Mean intracavity photon number <a†a>."""
        return self.expect(self.space.number()).real

    def trace_distance(self, other: DensityMatrix) -> float:
        """Trace distance ||ρ - σ||₁ / 2."""
        eigenvalues = numpy.linalg.eigvalsh(self.matrix - other.matrix)
        return 0.5 * float(numpy.sum(numpy.abs(eigenvalues)))


def steady_state(
    model: LindbladModel,
    *,
    rcond: float = 1e-12,
    residual_tol: float = 1e-9,
    fock_guard: float = 1e-4,
) -> DensityMatrix:
    """Unique stationary state of a model.

    The null space of the Liouvillian is read from its singular values.
    The stationary vector is then solved from the Liouvillian with one
    diagonal equation replaced by the trace condition, which keeps small
    multi-photon elements accurate.

    Args:
        model: Lindblad model.
        rcond: Singular values below `rcond` times the largest span the
            null space.
        residual_tol: Largest accepted relative residual ||L ρ|| / ||L||.
        fock_guard: Largest accepted population of the highest Fock
            state.

    Returns:
        Trace-normalized Hermitian steady state.

    Raises:
        NonUniqueSteadyStateError: If the null space is degenerate.
        SolverError: If the residual exceeds `residual_tol`.
        TruncationError: If the highest Fock state is populated above
            `fock_guard`.
    """
    space = model.space
    dim = space.total_dim
    liouvillian = model.liouvillian

    _, singular, vh = scipy.linalg.svd(liouvillian)
    null = int(numpy.count_nonzero(singular <= rcond * singular[0]))
    logger.debug(f'Smallest Liouvillian singular values: {singular[-3:]}')
    if null > 1:
        raise NonUniqueSteadyStateError(
            f'Liouvillian null space has dimension {null}; the steady state '
            'depends on the initial state.',
        )

    bordered = liouvillian.copy()
    bordered[0, :] = trace_functional(dim)
    rhs = numpy.zeros(dim * dim, dtype=complex)
    rhs[0] = 1
    try:
        solution = scipy.linalg.solve(bordered, rhs)
    except (numpy.linalg.LinAlgError, ValueError):
        solution = vh[-1].conj()
    else:
        # One step of iterative refinement.
        solution = solution + scipy.linalg.solve(
            bordered,
            rhs - bordered @ solution,
        )

    rho = unvec(solution, dim)
    rho = rho / numpy.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(
        numpy.linalg.norm(liouvillian @ vec(rho))
        / (singular[0] * numpy.linalg.norm(rho)),
    )
    if residual > residual_tol:
        raise SolverError(
            f'Steady-state residual {residual:.3e} exceeds '
            f'{residual_tol:.1e}.',
        )

    top = numpy.trace(space.fock_projector(space.fock_cutoff) @ rho).real
    if top >= fock_guard:
        raise TruncationError(
            f'Population {top:.3e} of Fock state {space.fock_cutoff} reaches '
            f'the guard {fock_guard:.1e}; increase the fock cutoff.',
        )
    return DensityMatrix(rho, space)


def _check_times(times: Sequence[float] | numpy.ndarray) -> numpy.ndarray:
    times = numpy.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError('Times must be a non-empty one-dimensional array.')
    if times[0] < 0:
        raise ValueError(
            f'Times must be non-negative but start at {times[0]}.',
        )
    if numpy.any(numpy.diff(times) <= 0):
        raise ValueError('Times must be strictly increasing.')
    return times


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix,
    times: Sequence[float] | numpy.ndarray,
    *,
    method: Literal['adaptive', 'propagator'] = 'adaptive',
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> list[DensityMatrix]:
    """Propagate a state under the model.

    Args:
        model: Lindblad model.
        rho0: State at t = 0.
        times: Strictly increasing non-negative output times (ps).
        method: `'adaptive'` integrates with an embedded 8(5,3)
            Runge-Kutta scheme; `'propagator'` applies exp(L Δt) for each
            distinct step, which suits long uniform grids.
        rtol: Relative tolerance of the adaptive integrator.
        atol: Absolute tolerance of the adaptive integrator.

    Returns:
        States at `times`.

    Raises:
        SolverError: If the adaptive integration fails.
        PhysicsInvariantError: If a propagated state is not a density
            matrix.
    """
    times = _check_times(times)
    internal = ps_to_internal(times)
    liouvillian = model.liouvillian
    dim = model.space.total_dim
    y0 = vec(numpy.asarray(rho0.matrix, dtype=complex))

    if method == 'adaptive':
        if internal[-1] == 0:
            vectors = [y0]
        else:
            solution = scipy.integrate.solve_ivp(
                lambda _, y: liouvillian @ y,
                (0.0, internal[-1]),
                y0,
                method='DOP853',
                t_eval=internal,
                rtol=rtol,
                atol=atol,
            )
            if not solution.success:
                last = solution.t[-1] if solution.t.size else 0.0
                reached = internal_to_ps(last)
                raise SolverError(
                    f'Adaptive integration failed at t = {reached:.4g} ps '
                    f'after {solution.nfev} evaluations: {solution.message}',
                )
            vectors = list(solution.y.T)
    elif method == 'propagator':
        propagators: dict[float, numpy.ndarray] = {}
        vectors = []
        y = y0
        previous = 0.0
        for t_ps, t in zip(times, internal):
            step = round(float(t_ps - previous), 9)
            if step > 0:
                if step not in propagators:
                    propagators[step] = scipy.linalg.expm(
                        liouvillian * (t - ps_to_internal(previous)),
                    )
                y = propagators[step] @ y
            vectors.append(y)
            previous = float(t_ps)
        logger.debug(f'Evolved with {len(propagators)} distinct propagators')
    else:
        raise ValueError(f'Unknown evolution method {method!r}.')

    return [
        DensityMatrix(unvec(y, dim), model.space, trace_tol=1e-9)
        for y in vectors
    ]
