"""Lindblad master-equation engine.

The dot is modeled by its four levels |down>, |up>, |T1>, |T2> tensored
with a truncated Fock space of the cavity mode, in a frame rotating at the
laser frequency. Observables follow from the steady state and, for
spectra and photon correlations, from the quantum regression theorem.
"""

from __future__ import annotations

from qdraman.engine.calibrate import calibrate_coupling
from qdraman.engine.calibrate import dressed_transition
from qdraman.engine.calibrate import resolve_coupling
from qdraman.engine.correlation import emission_spectrum
from qdraman.engine.correlation import EmissionSpectrumSolver
from qdraman.engine.correlation import g2
from qdraman.engine.correlation import sideband_weights
from qdraman.engine.hilbert import HilbertSpace
from qdraman.engine.model import build_model
from qdraman.engine.model import CollapseChannel
from qdraman.engine.model import LindbladModel
from qdraman.engine.solvers import DensityMatrix
from qdraman.engine.solvers import evolve
from qdraman.engine.solvers import steady_state
