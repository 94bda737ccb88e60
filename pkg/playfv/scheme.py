"""
Godunov-type finite volume scheme for u and w.

Each cell K_i carries averages (u_i, w_i). Local Riemann problems at the
two interfaces are solved exactly inside the half cells, which gives four
numerical fluxes per cell: h1+ / h2+ on the left interface and h1- / h2-
on the right one, with h1 + h2 equal to the Godunov flux g of f. The
update is

    u_i <- u_i - lam * (h1-(u_i, u_{i+1}, w_i) - h1+(u_{i-1}, u_i, w_i))
    w_i <- w_i - lam * (h2-(u_i, u_{i+1}, w_i) - h2+(u_{i-1}, u_i, w_i))

with lam = dt / dx and dt <= dx / (2 L).
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .flux import (
    ConvexFlux,
    ModifiedFlux,
    exceeds,
    fast_shock_left,
    fast_shock_right,
    godunov_two_point,
    left_family,
    lipschitz_on,
    modified_eval,
    modified_godunov,
    right_family,
)
from .hysteresis import PlayConfig, PlayState
from .riemann import RiemannProblem, solve, trace

logger = logging.getLogger(__name__)

# Post-update strip tolerance, relative to the data scale
STRIP_CHECK_TOLERANCE = 1e-10

# Gauss-Legendre points per cell for initial averages
QUADRATURE_POINTS = 3


class StripViolationError(RuntimeError):
    """A cell left the hysteresis strip after an update."""

    def __init__(self, step_index: int, cell: int, u: float, w: float, a: float):
        self.step_index = step_index
        self.cell = cell
        super().__init__(
            f"Step {step_index}: cell {cell} left the strip (u={u}, w={w}, a={a})"
        )


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of n_cells cells of width dx starting at x_min."""
    x_min: float
    dx: float
    n_cells: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"Cell width must be positive, got dx={self.dx}")
        if self.n_cells < 1:
            raise ValueError(f"Need at least one cell, got n_cells={self.n_cells}")

    @classmethod
    def from_domain(cls, x_min: float, x_max: float, dx: float) -> "Grid1D":
        if not x_max > x_min:
            raise ValueError(f"Empty domain [{x_min}, {x_max}]")
        n_cells = int(round((x_max - x_min) / dx))
        return cls(x_min=x_min, dx=dx, n_cells=n_cells)

    @property
    def x_max(self) -> float:
        return self.x_min + self.n_cells * self.dx

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def interfaces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


@dataclass
class FieldState:
    """Cell averages at one time level."""
    u: np.ndarray
    w: np.ndarray
    t: float = 0.0
    step_index: int = 0

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.w.copy(), self.t, self.step_index)

    def strip_excess(self, a: float) -> float:
        """Largest amount by which |u - w| exceeds a (<= 0 when inside)."""
        return float(np.max(np.abs(self.u - self.w)) - a)


@dataclass(frozen=True)
class SchemeConfig:
    """Flux, hysteresis width and time step policy."""
    flux: ConvexFlux
    a: float
    cfl_fraction: float = 1.0
    boundary: str = "constant"

    def __post_init__(self):
        PlayConfig(self.a)
        if not 0 < self.cfl_fraction <= 1:
            raise ValueError(f"cfl_fraction must lie in (0, 1], got {self.cfl_fraction}")
        if self.boundary != "constant":
            raise ValueError(f"Unsupported boundary '{self.boundary}' (only 'constant')")


@dataclass
class FluxTriple:
    """Numerical fluxes seen by each cell; g_left / g_right are Godunov fluxes."""
    h1_plus: np.ndarray
    h1_minus: np.ndarray
    h2_plus: np.ndarray
    h2_minus: np.ndarray
    g_left: np.ndarray
    g_right: np.ndarray


@dataclass
class StepReport:
    """What one step did, kept for the diagnostics."""
    dt: float
    fluxes: FluxTriple
    a_coef: np.ndarray
    b_coef: np.ndarray
    c_coef: np.ndarray
    d_coef: np.ndarray
    boundary_flux: Tuple[float, float]
    trace_left: Optional[np.ndarray] = None
    trace_right: Optional[np.ndarray] = None


# =============================================================================
# INITIAL DATA AND TIME STEP
# =============================================================================

def project_initial(
    u0: Callable[[np.ndarray], np.ndarray],
    w0: Callable[[np.ndarray], np.ndarray],
    grid: Grid1D,
    a: float,
) -> FieldState:
    """
    Cell averages of the initial data by Gauss-Legendre quadrature.

    Raises:
        ValueError: If |u0 - w0| > a at a quadrature node, naming the cell
    """
    nodes, weights = leggauss(QUADRATURE_POINTS)
    left = grid.interfaces[:-1]
    x = left[:, None] + 0.5 * grid.dx * (nodes[None, :] + 1.0)
    u_pts = np.broadcast_to(np.asarray(u0(x), dtype=float), x.shape)
    w_pts = np.broadcast_to(np.asarray(w0(x), dtype=float), x.shape)

    bad = np.abs(u_pts - w_pts) > a + 1e-12
    if np.any(bad):
        cell = int(np.argmax(np.any(bad, axis=1)))
        raise ValueError(
            f"Initial data leaves the strip |u - w| <= {a} in cell {cell} "
            f"(x in [{left[cell]:.6g}, {left[cell] + grid.dx:.6g}])"
        )

    u = 0.5 * (u_pts @ weights)
    w = 0.5 * (w_pts @ weights)
    return FieldState(u=u, w=w, t=0.0, step_index=0)


def cfl_dt(cfg: SchemeConfig, grid: Grid1D, state: FieldState) -> float:
    """
    Time step cfl_fraction * dx / (2 L), L the Lipschitz constant of f on
    the range of u.

    Raises:
        ValueError: If L = 0
    """
    L = lipschitz_on(cfg.flux, float(np.min(state.u)), float(np.max(state.u)))
    if L == 0:
        raise ValueError("Lipschitz constant of the flux vanishes on the data range")
    return cfg.cfl_fraction * grid.dx / (2.0 * L)


# =============================================================================
# NUMERICAL FLUXES
# =============================================================================

def _check_strip(x, gamma, a: float, label: str) -> None:
    if np.any(exceeds(np.abs(np.asarray(x) - np.asarray(gamma)), a, 1e-10)):
        raise ValueError(f"Cell state outside the strip: need |{label} - gamma| <= a={a}")


def _out(value):
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _h1_plus(f: ConvexFlux, alpha, beta, gamma, a: float):
    fast = fast_shock_right(f, alpha, beta, gamma, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        _, _, mu, _, _ = right_family(f, alpha, beta, gamma, a)
    shock_value = mu * (np.asarray(alpha) - beta) + f(beta)
    return np.where(fast, shock_value, modified_godunov(f, gamma, a, alpha, beta))


def _h1_minus(f: ConvexFlux, alpha, beta, gamma, a: float):
    fast = fast_shock_left(f, alpha, beta, gamma, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        _, _, nu, _, _ = left_family(f, alpha, beta, gamma, a)
    shock_value = -nu * (np.asarray(alpha) - beta) + f(alpha)
    return np.where(fast, shock_value, modified_godunov(f, gamma, a, alpha, beta))


def h1_plus(alpha, beta, gamma, f: ConvexFlux, a: float):
    """
    u-flux entering cell (beta, gamma) through its left interface.

    Equals the Godunov flux of the Tilde flux anchored at gamma, except when
    a right-moving fast shock enters the cell, where it is
    mu * (alpha - beta) + f(beta).
    """
    _check_strip(beta, gamma, a, "beta")
    return _out(_h1_plus(f, alpha, beta, gamma, a))


def h1_minus(alpha, beta, gamma, f: ConvexFlux, a: float):
    """
    u-flux leaving cell (alpha, gamma) through its right interface.

    Godunov flux of the Tilde flux anchored at gamma, or
    -nu * (alpha - beta) + f(alpha) under a left-moving fast shock.
    """
    _check_strip(alpha, gamma, a, "alpha")
    return _out(_h1_minus(f, alpha, beta, gamma, a))


def h2_plus(alpha, beta, gamma, f: ConvexFlux, a: float):
    """w-flux through the left interface: g(alpha, beta) - h1_plus."""
    _check_strip(beta, gamma, a, "beta")
    return _out(godunov_two_point(f, alpha, beta) - _h1_plus(f, alpha, beta, gamma, a))


def h2_minus(alpha, beta, gamma, f: ConvexFlux, a: float):
    """w-flux through the right interface: g(alpha, beta) - h1_minus."""
    _check_strip(alpha, gamma, a, "alpha")
    return _out(godunov_two_point(f, alpha, beta) - _h1_minus(f, alpha, beta, gamma, a))


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    zero = den == 0
    return np.where(zero, 0.0, num / np.where(zero, 1.0, den))


# =============================================================================
# TIME STEPPING
# =============================================================================

def interface_traces(state: FieldState, cfg: SchemeConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact u-traces of the local Riemann fans around every cell.

    Returns:
        (trace_left, trace_right): u at x_{i-1/2}+ and at x_{i+1/2}- per cell
    """
    up = np.pad(state.u, 1, mode="edge")
    wp = np.pad(state.w, 1, mode="edge")
    n = state.u.size
    minus = np.empty(n + 1)
    plus = np.empty(n + 1)
    for j in range(n + 1):
        fan = solve(RiemannProblem(
            PlayState(float(up[j]), float(wp[j])),
            PlayState(float(up[j + 1]), float(wp[j + 1])),
            cfg.a, cfg.flux,
        ))
        minus[j] = trace(fan, "left").u
        plus[j] = trace(fan, "right").u
    return plus[:-1], minus[1:]


def step(
    state: FieldState,
    cfg: SchemeConfig,
    grid: Grid1D,
    dt: Optional[float] = None,
    record_traces: bool = False,
) -> Tuple[FieldState, StepReport]:
    """
    Advance one time level with constant-extension ghost cells.

    Args:
        state: Current layer
        cfg: Scheme configuration
        grid: Grid the layer lives on
        dt: Time step; cfl_dt of the current layer when None
        record_traces: Also solve the interface Riemann problems exactly
            and keep their traces (needed by per-cell dissipation checks)

    Returns:
        (next layer, step report)

    Raises:
        StripViolationError: If a cell leaves the strip
    """
    if state.u.size != grid.n_cells:
        raise ValueError(f"State has {state.u.size} cells, grid has {grid.n_cells}")
    if dt is None:
        dt = cfl_dt(cfg, grid, state)
    f, a = cfg.flux, cfg.a
    lam = dt / grid.dx

    u, w = state.u, state.w
    up = np.pad(u, 1, mode="edge")
    wp = np.pad(w, 1, mode="edge")
    u_left, u_right = up[:-2], up[2:]
    w_left, w_right = wp[:-2], wp[2:]

    g = np.asarray(godunov_two_point(f, up[:-1], up[1:]), dtype=float)
    g_left, g_right = g[:-1], g[1:]
    hp1 = np.asarray(_h1_plus(f, u_left, u, w, a), dtype=float)
    hm1 = np.asarray(_h1_minus(f, u, u_right, w, a), dtype=float)
    hp2 = g_left - hp1
    hm2 = g_right - hm1

    u_next = u - lam * (hm1 - hp1)
    w_next = w - lam * (hm2 - hp2)

    fu = np.asarray(f(u), dtype=float)
    report = StepReport(
        dt=dt,
        fluxes=FluxTriple(hp1, hm1, hp2, hm2, g_left, g_right),
        a_coef=lam * _ratio(hp1 - fu, u_left - u),
        b_coef=lam * _ratio(hm1 - fu, u - u_right),
        c_coef=lam * _ratio(hp2, w_left - w),
        d_coef=lam * _ratio(hm2, w - w_right),
        boundary_flux=(float(g[0]), float(g[-1])),
    )
    if record_traces:
        report.trace_left, report.trace_right = interface_traces(state, cfg)

    scale = max(1.0, float(np.max(np.abs(u_next))))
    excess = np.abs(u_next - w_next) - a
    if np.any(excess > STRIP_CHECK_TOLERANCE * scale):
        cell = int(np.argmax(excess))
        raise StripViolationError(
            state.step_index + 1, cell, float(u_next[cell]), float(w_next[cell]), a
        )

    next_state = FieldState(u_next, w_next, state.t + dt, state.step_index + 1)
    return next_state, report


def _is_identity_flux(f: ConvexFlux) -> bool:
    points = np.array([-2.0, -0.5, 0.0, 1.0, 3.0])
    return bool(np.allclose(f(points), points) and np.allclose(f.deriv(points), 1.0))


def linear_step(
    state: FieldState,
    cfg: SchemeConfig,
    grid: Grid1D,
    dt: Optional[float] = None,
) -> FieldState:
    """
    Upwind update for the linear flux f(u) = u.

    All waves move right, so the flux entering cell i is the Tilde flux
    anchored at w_i evaluated at the left neighbour; w follows from
    conservation of u + w.

    Raises:
        ValueError: If the configured flux is not f(u) = u
    """
    if not _is_identity_flux(cfg.flux):
        raise ValueError(f"linear_step needs f(u) = u, got flux '{cfg.flux.name}'")
    if dt is None:
        dt = cfl_dt(cfg, grid, state)
    lam = dt / grid.dx
    u, w = state.u, state.w
    u_left = np.pad(u, 1, mode="edge")[:-2]

    anchored = ModifiedFlux.tilde(w)
    flux_out = modified_eval(cfg.flux, anchored, cfg.a, u)
    flux_in = modified_eval(cfg.flux, anchored, cfg.a, u_left)
    u_next = u - lam * (flux_out - flux_in)
    w_next = u + w - lam * (u - u_left) - u_next
    return FieldState(u_next, w_next, state.t + dt, state.step_index + 1)


Observer = Callable[[FieldState, FieldState, StepReport], None]


def run(
    initial: FieldState,
    cfg: SchemeConfig,
    grid: Grid1D,
    t_end: float,
    observers: Optional[List[Observer]] = None,
    dt: Optional[float] = None,
    record_traces: bool = False,
) -> FieldState:
    """
    Step from initial.t to exactly t_end.

    dt is fixed for the whole run (cfl_dt of the initial layer unless
    given); the last step is shortened to land on t_end. Each observer is
    called as observer(previous, next, report) after every step.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end={t_end} precedes the initial time {initial.t}")
    if dt is None:
        dt = cfl_dt(cfg, grid, initial)
    observers = observers or []

    state = initial
    logger.debug(f"Running {cfg.flux.name} a={cfg.a} from t={initial.t} to {t_end}, dt={dt:.6g}")
    while True:
        remaining = t_end - state.t
        if remaining <= 1e-12 * dt:
            break
        last = remaining <= dt * (1.0 + 1e-12)
        dt_n = remaining if last else dt
        next_state, report = step(state, cfg, grid, dt=dt_n, record_traces=record_traces)
        if last:
            next_state = replace(next_state, t=t_end)
        for observer in observers:
            observer(state, next_state, report)
        state = next_state
    return state
