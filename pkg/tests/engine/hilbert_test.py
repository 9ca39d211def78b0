from __future__ import annotations

import numpy
import pytest

from qdraman.engine.hilbert import dissipator
from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.hilbert import spost
from qdraman.engine.hilbert import spre
from qdraman.engine.hilbert import trace_functional
from qdraman.engine.hilbert import unvec
from qdraman.engine.hilbert import vec


def random_matrix(dim: int, seed: int) -> numpy.ndarray:
    rng = numpy.random.default_rng(seed)
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


@pytest.mark.parametrize(('cutoff', 'dim'), ((1, 8), (2, 12), (4, 20)))
def test_dimensions(cutoff: int, dim: int) -> None:
    space = HilbertSpace(cutoff)
    assert space.qd_dim == 4
    assert space.fock_dim == cutoff + 1
    assert space.total_dim == dim


def test_basis_ordering() -> None:
    space = HilbertSpace(2)
    assert space.index('down', 0) == 0
    assert space.index('up', 1) == 4
    assert space.index('T2', 2) == 11
    ket = space.basis('T1', 1)
    assert ket[7] == 1
    assert numpy.sum(numpy.abs(ket)) == 1


def test_ladder_operators() -> None:
    space = HilbertSpace(3)
    a = space.destroy()
    ket = space.basis('up', 2)
    assert a @ ket == pytest.approx(numpy.sqrt(2) * space.basis('up', 1))
    assert space.number() @ ket == pytest.approx(2 * ket)
    # [a, a†] = 1 except on the truncated top state.
    commutator = a @ a.conj().T - a.conj().T @ a
    for level in ('down', 'T2'):
        for photons in range(space.fock_cutoff):
            vector = space.basis(level, photons)
            assert commutator @ vector == pytest.approx(vector)

    projectors = sum(space.fock_projector(n) for n in range(4))
    assert projectors == pytest.approx(numpy.eye(space.total_dim))


def test_qd_transition() -> None:
    space = HilbertSpace(1)
    sigma = space.qd_transition('up', 'T2')
    assert sigma @ space.basis('T2', 1) == pytest.approx(space.basis('up', 1))
    assert sigma @ space.basis('up', 0) == pytest.approx(
        numpy.zeros(space.total_dim),
    )
    total = sum(space.projector(level) for level in ('down', 'up', 'T1', 'T2'))
    assert total == pytest.approx(numpy.eye(space.total_dim))


def test_superoperators_column_stacking() -> None:
    a = random_matrix(5, 0)
    b = random_matrix(5, 1)
    x = random_matrix(5, 2)
    assert spre(a) @ vec(x) == pytest.approx(vec(a @ x))
    assert spost(b) @ vec(x) == pytest.approx(vec(x @ b))
    assert unvec(vec(x), 5) == pytest.approx(x)
    assert trace_functional(5) @ vec(x) == pytest.approx(numpy.trace(x))


def test_dissipator_preserves_trace_and_hermiticity() -> None:
    c = random_matrix(4, 3)
    rho = random_matrix(4, 4)
    rho = rho @ rho.conj().T
    out = unvec(dissipator(c) @ vec(rho), 4)
    assert numpy.trace(out) == pytest.approx(0, abs=1e-12)
    assert out == pytest.approx(out.conj().T)
    expected = (
        c @ rho @ c.conj().T
        - 0.5 * (c.conj().T @ c @ rho + rho @ c.conj().T @ c)
    )
    assert out == pytest.approx(expected)
