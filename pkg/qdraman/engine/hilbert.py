"""Hilbert space of the dot and cavity, and superoperator helpers.

Density matrices are vectorized by stacking columns, so that
vec(A X B) = (Bᵀ ⊗ A) vec(X).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy

DOWN = 0
UP = 1
T1 = 2
T2 = 3
QD_DIM = 4

QD_INDEX = {'down': DOWN, 'up': UP, 'T1': T1, 'T2': T2}
"""Dot basis index of each level name."""


class HilbertSpace(NamedTuple):
    """Dot levels tensored with cavity Fock states 0..N_max.

    The basis index of |q, n> is `q * (N_max + 1) + n` with the dot
    levels ordered |down>, |up>, |T1>, |T2>.
    """

    fock_cutoff: int = 2
    """Highest photon number N_max."""

    @property
    def qd_dim(self) -> int:
        """Number of dot levels."""
        return QD_DIM

    @property
    def fock_dim(self) -> int:
        """Number of Fock states."""
        return self.fock_cutoff + 1

    @property
    def total_dim(self) -> int:
        """Dimension 4 (N_max + 1) of the full space."""
        return QD_DIM * self.fock_dim

    def index(self, level: str, photons: int) -> int:
        """Basis index of |level, photons>."""
        return QD_INDEX[level] * self.fock_dim + photons

    def basis(self, level: str, photons: int = 0) -> numpy.ndarray:
        """Basis ket |level, photons>."""
        ket = numpy.zeros(self.total_dim, dtype=complex)
        ket[self.index(level, photons)] = 1
        return ket

    def qd_operator(self, operator: numpy.ndarray) -> numpy.ndarray:
        """Embed a 4x4 dot operator as `operator ⊗ 1`."""
        return numpy.kron(operator, numpy.eye(self.fock_dim))

    def qd_transition(self, lower: str, upper: str) -> numpy.ndarray:
        """Dot operator |lower><upper| on the full space."""
        op = numpy.zeros((QD_DIM, QD_DIM), dtype=complex)
        op[QD_INDEX[lower], QD_INDEX[upper]] = 1
        return self.qd_operator(op)

    def projector(self, level: str) -> numpy.ndarray:
        """Projector onto a dot level."""
        return self.qd_transition(level, level)

    def destroy(self) -> numpy.ndarray:
        """Photon annihilation operator `1 ⊗ a`."""
        a = numpy.diag(numpy.sqrt(numpy.arange(1, self.fock_dim)), k=1)
        return numpy.kron(numpy.eye(QD_DIM), a).astype(complex)

    def number(self) -> numpy.ndarray:
        """Photon number operator `1 ⊗ a†a`."""
        a = self.destroy()
        return a.conj().T @ a

    def fock_projector(self, photons: int) -> numpy.ndarray:
        """Projector onto photon number `photons`."""
        op = numpy.zeros((self.fock_dim, self.fock_dim), dtype=complex)
        op[photons, photons] = 1
        return numpy.kron(numpy.eye(QD_DIM), op)


def vec(matrix: numpy.ndarray) -> numpy.ndarray:
    """Stack the columns of a matrix into a vector."""
    return numpy.asarray(matrix).reshape(-1, order='F')


def unvec(vector: numpy.ndarray, dim: int) -> numpy.ndarray:
    """Inverse of [`vec()`][qdraman.engine.hilbert.vec]."""
    return numpy.asarray(vector).reshape((dim, dim), order='F')


def spre(operator: numpy.ndarray) -> numpy.ndarray:
    """Superoperator of left multiplication, X -> A X."""
    return numpy.kron(numpy.eye(operator.shape[0]), operator)


def spost(operator: numpy.ndarray) -> numpy.ndarray:
    """Superoperator of right multiplication, X -> X A."""
    return numpy.kron(operator.T, numpy.eye(operator.shape[0]))


def dissipator(operator: numpy.ndarray) -> numpy.ndarray:
    """Lindblad dissipator D[C] X = C X C† - {C†C, X}/2."""
    c_dag_c = operator.conj().T @ operator
    return (
        numpy.kron(operator.conj(), operator)
        - 0.5 * spre(c_dag_c)
        - 0.5 * spost(c_dag_c)
    )


def trace_functional(dim: int) -> numpy.ndarray:
    """Row vector t with t · vec(X) = Tr X."""
    return vec(numpy.eye(dim, dtype=complex))
