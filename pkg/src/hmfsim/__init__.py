"""Weighted-particle simulator for the cosine mean-field model.

Subpackages:
    equilibrium  -- thermal stationary state and its self-consistency solver
    ensemble     -- weighted particle cloud, lattice init, magnetization
    dynamics     -- symplectic time stepping and conservation monitors
    perturbation -- perturbed initial densities
    analysis     -- detrending, envelopes, power-law fits, spectra
    theory       -- pendulum action-angle quantities and decay predictions
    cli          -- command-line pipeline
"""

__version__ = "0.1.0"

from .equilibrium import EquilibriumState, solve_m0, f0_density
from .ensemble import WeightedEnsemble, MagnetizationSample, init_lattice, magnetization, casimirs
from .dynamics import SimConfig, MagnetizationSeries, step, run, total_energy, total_momentum
from .perturbation import PerturbationSpec, perturbed_density
from .theory import PendulumOrbit, DecayPrediction, orbit_from_energy, orbit_from_action, separatrix_action, angle_fourier, predict_decay
