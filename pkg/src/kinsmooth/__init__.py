"""Pseudo-spectral experiments on smoothing effects of kinetic equations.

Modules
-------
grid           phase-space grids, transform contract, multipliers, moments
exact          exact Fourier-side solutions, phase integrals, smoothing weights
landau         homogeneous Landau equation with Maxwellian molecules
inhomogeneous  split-step Fokker-Planck and linear Landau model solvers
diagnostics    Gevrey fits, lemma oracle, ratio curves
scenarios/cli  scenario runner and command line
"""

from .errors import (
    ConfigurationError,
    ContractError,
    DegenerateStateError,
    DomainTooSmallError,
    KinsmoothError,
    MultiplierOverflowError,
    NumericalError,
    QuadratureError,
)
from .exact import MultiplierSpec, PhaseParams
from .grid import Field, Grid, MomentSet, SpectralField, forward_transform, inverse_transform

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ContractError",
    "DegenerateStateError",
    "DomainTooSmallError",
    "KinsmoothError",
    "MultiplierOverflowError",
    "NumericalError",
    "QuadratureError",
    "Field",
    "Grid",
    "MomentSet",
    "SpectralField",
    "forward_transform",
    "inverse_transform",
    "MultiplierSpec",
    "PhaseParams",
]
