"""Fourier spectral / exponential time differencing solver for space-fractional
reaction-diffusion systems on rectangles with homogeneous Dirichlet or Neumann
boundaries."""
from .kernels import BACKEND
from .mesh import BoundaryKind, Domain, Grid, SpectrumTable, axis_wavenumbers, build_grid, build_spectrum, build_symbol
from .models import PredPreyParams, FisherParams, ReactionSpec, coexistence_steady_state
from .stepper import Scheme, SimulationAbort, StepperState, integrate, run
from .config import RunConfig, ConfigError, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundaryKind",
    "ConfigError",
    "Domain",
    "FisherParams",
    "Grid",
    "PredPreyParams",
    "ReactionSpec",
    "RunConfig",
    "Scheme",
    "SimulationAbort",
    "SpectrumTable",
    "StepperState",
    "axis_wavenumbers",
    "build_grid",
    "build_spectrum",
    "build_symbol",
    "coexistence_steady_state",
    "integrate",
    "load_config",
    "parse_config",
    "run",
]
