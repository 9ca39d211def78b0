"""Cavity-stimulated Raman spin-flip emission simulator.

A perturbative model of the Raman sidebands is provided in
[`qdraman.raman`][qdraman.raman] and a Lindblad master-equation engine in
[`qdraman.engine`][qdraman.engine]. Figure pipelines and the command line
live in [`qdraman.scenarios`][qdraman.scenarios] and
[`qdraman.cli`][qdraman.cli].
"""

from __future__ import annotations

import importlib.metadata

__version__ = importlib.metadata.version('qdraman')
