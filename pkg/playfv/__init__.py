"""
playfv: finite volume solver for scalar conservation laws with Play hysteresis.

Solves u_t + w_t + f(u)_x = 0 with w = F[u] the Play operator of
half-width a and f convex, using a Godunov-type scheme built on exact
Riemann solutions. Every run can be checked against the scheme's discrete
entropy inequality, its weak hysteresis energy inequality and its
compactness estimates.

Modules:
- hysteresis: Play operator and the weak Play relation
- flux: convex fluxes, modified fluxes, shock speeds, entropy potential
- riemann: exact Riemann solver, sampling, admissibility classifier
- scheme: grid, numerical fluxes, time stepping
- diagnostics: discrete inequality monitors and the run ledger
- scenarios / runner: scenario files, presets, artifacts, refinement studies
"""

__version__ = "0.1.0"

from .hysteresis import PlayConfig, PlayState, play_project, play_trajectory, verify_weak_play
from .flux import ConvexFlux, get_flux, register_flux, available_fluxes
from .riemann import RiemannProblem, WaveFan, solve, sample, admissible
from .scheme import (
    FieldState,
    Grid1D,
    SchemeConfig,
    StripViolationError,
    cfl_dt,
    project_initial,
    run,
    step,
)
from .diagnostics import Ledger
from .config import PlayfvConfig, load_config
from .scenarios import Scenario, get_preset, list_presets, load_scenario

__all__ = [
    # Hysteresis
    "PlayConfig",
    "PlayState",
    "play_project",
    "play_trajectory",
    "verify_weak_play",
    # Fluxes
    "ConvexFlux",
    "get_flux",
    "register_flux",
    "available_fluxes",
    # Riemann solver
    "RiemannProblem",
    "WaveFan",
    "solve",
    "sample",
    "admissible",
    # Scheme
    "FieldState",
    "Grid1D",
    "SchemeConfig",
    "StripViolationError",
    "cfl_dt",
    "project_initial",
    "run",
    "step",
    # Diagnostics
    "Ledger",
    # Configuration and scenarios
    "PlayfvConfig",
    "load_config",
    "Scenario",
    "get_preset",
    "list_presets",
    "load_scenario",
    # Version
    "__version__",
]
