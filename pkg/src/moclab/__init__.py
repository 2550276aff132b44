"""Stability laboratory for method-of-characteristics schemes.

Modules
-------
model       grids, field states, the coupled-wave and Gross-Neveu models
schemes     SE, ME and LF steppers and the simulation loop
stability   amplification matrices, spatial roots, boundary determinants
spectral    windowed spectra, averaged norms and regression diagnostics
scenarios   registry of reproducible experiments
config      experiment config parsing
cli         the ``moclab`` command
"""

from .errors import ConfigError, MoclabError, NumericError
from .model import (BoundarySpec, CoupledWave, FieldState, Grid1D, GrossNeveu,
                    LinearCoupledWave, NoiseSpec, add_noise, background_state,
                    coupling_matrices, make_grid)
from .schemes import SchemeId, run, step_lf, step_me, step_rk4, step_se

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec", "ConfigError", "CoupledWave", "FieldState", "Grid1D", "GrossNeveu",
    "LinearCoupledWave", "MoclabError", "NoiseSpec", "NumericError", "SchemeId",
    "add_noise", "background_state", "coupling_matrices", "make_grid", "run",
    "step_lf", "step_me", "step_rk4", "step_se",
]
