"""Variational stability toolkit for radial planar vortices."""
__version__ = "0.1.0"

from .profiles import VortexProfile, make_profile, eval_V, eval_gaussian_BW, GaussianWeights
from .grid import RadialGrid, PolarField, make_grid, moments, project_constraints
from .spectral import (SpectralReport, NonConvergence, hardy_constant, btilde1_spectrum, kernel_index,
                       lk_spectrum, quasimode_analysis, delta_chain)
from .energy import (energy_radial, energy_modes, energy_via_h, rearrange, log_hls_gap, entropy_catalog,
                     maximize_free_energy)
from .forms import j_form, q_form, n_form, x_norm, gamma_estimate
from .evolve import EvolState, RunConfig, TrajectoryLog, BlowUp, CFLViolation, init_state, step, run

__all__ = ["VortexProfile", "make_profile", "eval_V", "eval_gaussian_BW", "GaussianWeights",
           "RadialGrid", "PolarField", "make_grid", "moments", "project_constraints",
           "SpectralReport", "NonConvergence", "hardy_constant", "btilde1_spectrum", "kernel_index",
           "lk_spectrum", "quasimode_analysis", "delta_chain",
           "energy_radial", "energy_modes", "energy_via_h", "rearrange", "log_hls_gap", "entropy_catalog",
           "maximize_free_energy", "j_form", "q_form", "n_form", "x_norm", "gamma_estimate",
           "EvolState", "RunConfig", "TrajectoryLog", "BlowUp", "CFLViolation", "init_state", "step", "run"]
