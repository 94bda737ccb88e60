"""
Machine checks of the discrete inequalities on live runs.

Monitors are pure functions of recorded layers:

- entropy_residual: discrete entropy inequality for constant pairs (k, k_hat)
- hysteresis_ledger_check: weak hysteresis energy inequality per step
- per_cell_dissipation: the same inequality cell by cell, from exact traces
- shock_dissipation_rate: energy dissipated by a single discontinuity
- l1_contraction_check: L1 distance between two runs over time
- compactness_monitors: TV, range and L1-in-time bounds

The Ledger class bundles the per-step monitors as a run observer and writes
the ledger CSV.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .flux import ConvexFlux, entropy_potential_G, godunov_two_point, lipschitz_on
from .hysteresis import PlayState
from .scheme import FieldState, Grid1D, SchemeConfig, StepReport

logger = logging.getLogger(__name__)

# Default tolerances; all are relative to a data scale
ENTROPY_TOLERANCE = 1e-12
LEDGER_TOLERANCE = 1e-10
MASS_TOLERANCE = 1e-12
CONTRACTION_TOLERANCE = 1e-10
MONOTONE_TOLERANCE = 1e-10
COEFFICIENT_TOLERANCE = 1e-12

LEDGER_COLUMNS = [
    "n", "t", "tv_u", "tv_w", "u_min", "u_max", "w_min", "w_max", "mass",
    "l2_u", "l2_w", "l2_sum", "energy_u", "energy_w", "energy",
    "dissipation", "entropy_residual_max", "ledger_slack",
]


@dataclass(frozen=True)
class EntropyPair:
    """Constants (k, k_hat) of a Kruzhkov-type entropy pair."""
    k: float
    k_hat: float

    def in_strip(self, a: float, tol: float = 1e-12) -> bool:
        return abs(self.k - self.k_hat) <= a + tol


@dataclass
class LedgerRecord:
    """Monitors of one time level."""
    n: int
    t: float
    tv_u: float
    tv_w: float
    range_u: Tuple[float, float]
    range_w: Tuple[float, float]
    mass: float
    l2_u: float
    l2_w: float
    energy_u: float
    energy_w: float
    dissipation: float
    entropy_residual_max: float = 0.0
    ledger_slack: float = 0.0

    @property
    def l2_sum(self) -> float:
        return self.l2_u + self.l2_w

    @property
    def energy(self) -> float:
        return self.energy_u + self.energy_w

    def to_row(self) -> List[float]:
        return [
            self.n, self.t, self.tv_u, self.tv_w, self.range_u[0], self.range_u[1],
            self.range_w[0], self.range_w[1], self.mass, self.l2_u, self.l2_w,
            self.l2_sum, self.energy_u, self.energy_w, self.energy,
            self.dissipation, self.entropy_residual_max, self.ledger_slack,
        ]


@dataclass
class LedgerCheckReport:
    slacks: List[float]
    worst_slack: float
    tolerance: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"worst_slack": self.worst_slack, "tolerance": self.tolerance,
                "passed": self.passed, "steps": len(self.slacks)}


@dataclass
class ContractionReport:
    distances: List[float]
    max_increase: float
    tolerance: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"initial": self.distances[0] if self.distances else 0.0,
                "final": self.distances[-1] if self.distances else 0.0,
                "max_increase": self.max_increase, "tolerance": self.tolerance,
                "passed": self.passed}


@dataclass
class CompactnessReport:
    tv_u: List[float]
    tv_w: List[float]
    tv_non_increasing: bool
    ranges_contained: bool
    step_ratio_u: float
    step_ratio_w: float
    cumulative_ratio_u: float
    cumulative_ratio_w: float

    @property
    def l1_time_bounded(self) -> bool:
        return max(self.step_ratio_u, self.step_ratio_w,
                   self.cumulative_ratio_u, self.cumulative_ratio_w) <= 1.0 + 1e-10

    @property
    def passed(self) -> bool:
        return self.tv_non_increasing and self.ranges_contained and self.l1_time_bounded

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("tv_u")
        data.pop("tv_w")
        data["l1_time_bounded"] = self.l1_time_bounded
        data["passed"] = self.passed
        return data


# =============================================================================
# ELEMENTARY MEASURES
# =============================================================================

def total_variation(v: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(v))))


def mass(state: FieldState, dx: float) -> float:
    """Integral of u + w."""
    return float(dx * np.sum(state.u + state.w))


def mass_drift(prev: FieldState, next: FieldState, f: ConvexFlux, dx: float) -> float:
    """
    Mismatch between the change of mass and the boundary flux difference.

    With constant extension the boundary fluxes are f(u_first) and f(u_last)
    of the earlier layer, so the mismatch is zero up to rounding.
    """
    dt = next.t - prev.t
    expected = dt * (float(f(prev.u[0])) - float(f(prev.u[-1])))
    return mass(next, dx) - mass(prev, dx) - expected


def coefficient_bounds_ok(report: StepReport, tol: float = COEFFICIENT_TOLERANCE) -> bool:
    """Increment coefficients a, b, c, d all lie in [0, 1/2]."""
    for coef in (report.a_coef, report.b_coef, report.c_coef, report.d_coef):
        if np.any(coef < -tol) or np.any(coef > 0.5 + tol):
            return False
    return True


# =============================================================================
# DISCRETE ENTROPY INEQUALITY
# =============================================================================

def entropy_pairs(u: np.ndarray, w: np.ndarray, a: float, grid_size: int = 9) -> List[EntropyPair]:
    """
    Entropy pairs over the data hull: a grid_size x grid_size grid over
    [U_m, U_M] x [W_m, W_M] with k_hat clamped into [k - a, k + a], plus the
    four corners (U_m, U_m -+ a), (U_M, U_M -+ a) of the strip.
    """
    if grid_size < 1:
        raise ValueError(f"Entropy grid size must be positive, got {grid_size}")
    u_lo, u_hi = float(np.min(u)), float(np.max(u))
    w_lo, w_hi = float(np.min(w)), float(np.max(w))
    pairs = []
    seen = set()
    for k in np.linspace(u_lo, u_hi, grid_size):
        for k_hat in np.linspace(w_lo, w_hi, grid_size):
            k_hat = min(max(k_hat, k - a), k + a)
            key = (float(k), float(k_hat))
            if key not in seen:
                seen.add(key)
                pairs.append(EntropyPair(*key))
    for k in (u_lo, u_hi):
        for k_hat in (k - a, k + a):
            if (k, k_hat) not in seen:
                seen.add((k, k_hat))
                pairs.append(EntropyPair(k, k_hat))
    return pairs


def _entropy_residuals(
    prev: FieldState, next: FieldState, ks: np.ndarray, k_hats: np.ndarray,
    f: ConvexFlux, lam: float,
) -> np.ndarray:
    """Per-pair maximum over cells of the entropy inequality left-hand side."""
    k = ks[:, None]
    k_hat = k_hats[:, None]
    up = np.pad(prev.u, 1, mode="edge")[None, :]
    alpha, beta = up[:, :-1], up[:, 1:]
    Gk = (
        godunov_two_point(f, np.maximum(alpha, k), np.maximum(beta, k))
        - godunov_two_point(f, np.minimum(alpha, k), np.minimum(beta, k))
    )
    residual = (
        np.abs(next.u[None, :] - k) - np.abs(prev.u[None, :] - k)
        + np.abs(next.w[None, :] - k_hat) - np.abs(prev.w[None, :] - k_hat)
        + lam * (Gk[:, 1:] - Gk[:, :-1])
    )
    return np.max(residual, axis=1)


def entropy_residual(
    prev: FieldState,
    next: FieldState,
    pair: EntropyPair,
    f: ConvexFlux,
    dt: float,
    dx: float,
    a: float,
) -> float:
    """
    Largest left-hand side of the discrete entropy inequality over cells.

    For each cell
        |u'-k| - |u-k| + |w'-k_hat| - |w-k_hat|
            + dt/dx (G_k(u_i, u_{i+1}) - G_k(u_{i-1}, u_i))
    with G_k(x, y) = g(max(x,k), max(y,k)) - g(min(x,k), min(y,k)). A
    correct step keeps this <= 0 up to rounding.

    Raises:
        ValueError: If the pair lies outside the strip
    """
    if not pair.in_strip(a):
        raise ValueError(f"Entropy pair (k={pair.k}, k_hat={pair.k_hat}) outside strip a={a}")
    residuals = _entropy_residuals(
        prev, next, np.array([pair.k]), np.array([pair.k_hat]), f, dt / dx
    )
    return float(residuals[0])


def max_entropy_residual(
    prev: FieldState,
    next: FieldState,
    pairs: Sequence[EntropyPair],
    f: ConvexFlux,
    dt: float,
    dx: float,
) -> Tuple[float, float]:
    """
    Worst residual over a set of pairs.

    Returns:
        (largest residual, largest residual divided by |k| + |k_hat| + 1)
    """
    ks = np.array([p.k for p in pairs])
    k_hats = np.array([p.k_hat for p in pairs])
    residuals = _entropy_residuals(prev, next, ks, k_hats, f, dt / dx)
    scaled = residuals / (np.abs(ks) + np.abs(k_hats) + 1.0)
    return float(np.max(residuals)), float(np.max(scaled))


# =============================================================================
# WEAK HYSTERESIS ENERGY INEQUALITY
# =============================================================================

def _energy(v: np.ndarray, dx: float) -> float:
    return float(0.5 * dx * np.sum(v * v))


def ledger_slack(prev: FieldState, next: FieldState, f: ConvexFlux, dx: float, a: float) -> float:
    """
    Slack of the energy inequality over one step.

    -dt (G(u_last) - G(u_first)) - [E(next) - E(prev)] - a dx sum |w' - w|,
    with E = dx/2 sum(u^2 + w^2); non-negative for the scheme. The G term is
    the energy flux through the domain ends.
    """
    dt = next.t - prev.t
    boundary = dt * (
        float(entropy_potential_G(f, prev.u[-1])) - float(entropy_potential_G(f, prev.u[0]))
    )
    d_energy = (
        _energy(next.u, dx) - _energy(prev.u, dx) + _energy(next.w, dx) - _energy(prev.w, dx)
    )
    dissipated = a * dx * float(np.sum(np.abs(next.w - prev.w)))
    return -boundary - d_energy - dissipated


def hysteresis_ledger_check(
    history: Sequence[FieldState],
    dx: float,
    a: float,
    f: ConvexFlux,
    tol: float = LEDGER_TOLERANCE,
) -> LedgerCheckReport:
    """
    Check the weak hysteresis energy inequality on every step of a run.

    Passes when every slack is >= -tol * (initial l2 mass). Works on a
    recorded history (runner.stability_study); scenario runs stream the same
    slack through Ledger instead.

    Raises:
        ValueError: If fewer than two layers are given
    """
    if len(history) < 2:
        raise ValueError("Need at least two layers to check the energy ledger")
    slacks = [ledger_slack(p, n, f, dx, a) for p, n in zip(history[:-1], history[1:])]
    first = history[0]
    scale = dx * float(np.sum(first.u ** 2 + first.w ** 2))
    tolerance = tol * scale
    worst = min(slacks)
    return LedgerCheckReport(slacks, worst, tolerance, worst >= -tolerance)


def per_cell_dissipation(
    prev: FieldState,
    next: FieldState,
    report: StepReport,
    f: ConvexFlux,
    dt: float,
    dx: float,
    a: float,
) -> np.ndarray:
    """
    Cell-wise energy slack from the exact interface traces.

    For each cell
        -dt (G(u(x_{i+1/2}-)) - G(u(x_{i-1/2}+)))
            - dx/2 (u'^2 - u^2 + w'^2 - w^2) - a dx |w' - w|
    which is >= 0 for the scheme. Inside a cell crossed by one entropic
    shock it equals the shock's dissipation over the step.

    Raises:
        ValueError: If the step did not record interface traces
    """
    if report.trace_left is None or report.trace_right is None:
        raise ValueError("Step report carries no interface traces; use record_traces=True")
    flux_diff = entropy_potential_G(f, report.trace_right) - entropy_potential_G(f, report.trace_left)
    d_energy = 0.5 * dx * (next.u ** 2 - prev.u ** 2 + next.w ** 2 - prev.w ** 2)
    return -dt * np.asarray(flux_diff) - d_energy - a * dx * np.abs(next.w - prev.w)


def shock_dissipation_rate(
    left: PlayState,
    right: PlayState,
    sigma: float,
    f: ConvexFlux,
    a: float,
) -> float:
    """
    Energy dissipated per unit time by a discontinuity of speed sigma:

        G(u-) - G(u+) - sigma (E- - E+) - a |sigma| |w- - w+|

    with E = (u^2 + w^2) / 2. Non-negative for admissible shocks.
    """
    def energy(s: PlayState) -> float:
        return 0.5 * (s.u * s.u + s.w * s.w)

    return (
        float(entropy_potential_G(f, left.u)) - float(entropy_potential_G(f, right.u))
        - sigma * (energy(left) - energy(right))
        - a * abs(sigma) * abs(left.w - right.w)
    )


# =============================================================================
# STABILITY AND COMPACTNESS
# =============================================================================

def l1_distance(s1: FieldState, s2: FieldState, dx: float) -> float:
    return float(dx * np.sum(np.abs(s1.u - s2.u) + np.abs(s1.w - s2.w)))


def l1_contraction_check(
    run_a: Sequence[FieldState],
    run_b: Sequence[FieldState],
    dx: float,
    tol: float = CONTRACTION_TOLERANCE,
) -> ContractionReport:
    """
    L1 distance between two runs on the same grid at every common level.
    runner.stability_study feeds it a run and a perturbed copy.

    Passes when D(n+1) <= D(n) + tol * D(0) for all n.

    Raises:
        ValueError: If the runs live on different grids
    """
    if not run_a or not run_b:
        raise ValueError("Both runs need at least one layer")
    if run_a[0].u.size != run_b[0].u.size:
        raise ValueError(
            f"Grid mismatch: {run_a[0].u.size} cells vs {run_b[0].u.size} cells"
        )
    distances = [l1_distance(sa, sb, dx) for sa, sb in zip(run_a, run_b)]
    tolerance = tol * max(distances[0], np.finfo(float).tiny)
    increases = np.diff(distances) if len(distances) > 1 else np.zeros(1)
    max_increase = float(np.max(increases))
    return ContractionReport(distances, max_increase, tolerance, max_increase <= tolerance)


def _bound_ratio(observed: float, bound: float) -> float:
    if bound > 0:
        return observed / bound
    return 0.0 if observed <= 1e-14 else float("inf")


def l1_time_ratios(
    prev: FieldState,
    nxt: FieldState,
    first: FieldState,
    dx: float,
    L: float,
    dt: float,
    tv0_u: float,
    tv0_w: float,
) -> Tuple[float, float, float, float]:
    """
    Observed / allowed L1 change in time for one step.

    Returns:
        (step ratio u, step ratio w, ratio u since first, ratio w since first)
    """
    dt_n = nxt.t - prev.t
    elapsed = nxt.t - first.t + dt
    return (
        _bound_ratio(dx * float(np.sum(np.abs(nxt.u - prev.u))), 2 * L * dt_n * tv0_u),
        _bound_ratio(dx * float(np.sum(np.abs(nxt.w - prev.w))), 2 * L * dt_n * tv0_w),
        _bound_ratio(dx * float(np.sum(np.abs(nxt.u - first.u))), 2 * L * elapsed * tv0_u),
        _bound_ratio(dx * float(np.sum(np.abs(nxt.w - first.w))), 2 * L * elapsed * tv0_w),
    )


def compactness_monitors(
    history: Sequence[FieldState],
    dx: float,
    dt: float,
    L: float,
    tv0_u: Optional[float] = None,
    tv0_w: Optional[float] = None,
    tol: float = MONOTONE_TOLERANCE,
) -> CompactnessReport:
    """
    TV non-increase, L-infinity range containment and L1-in-time bounds.
    Recorded-history counterpart of the streaming Ledger checks, used by
    runner.stability_study.

    The time bounds are dx sum |v^{n+1} - v^n| <= 2 L dt_n TV(v_0) per step
    and dx sum |v^n - v^0| <= 2 L TV(v_0) (t_n - t_0 + dt) overall; the
    reported ratios are observed / bound.
    """
    if not history:
        raise ValueError("Empty history")
    first = history[0]
    tv0_u = total_variation(first.u) if tv0_u is None else tv0_u
    tv0_w = total_variation(first.w) if tv0_w is None else tv0_w

    tv_u = [total_variation(s.u) for s in history]
    tv_w = [total_variation(s.w) for s in history]
    tv_ok = all(
        b <= a_ + tol * max(1.0, tv0_u) for a_, b in zip(tv_u[:-1], tv_u[1:])
    ) and all(
        b <= a_ + tol * max(1.0, tv0_w) for a_, b in zip(tv_w[:-1], tv_w[1:])
    )

    def contained(v: np.ndarray, lo: float, hi: float) -> bool:
        slack = tol * max(1.0, abs(lo), abs(hi))
        return bool(np.min(v) >= lo - slack and np.max(v) <= hi + slack)

    u_lo, u_hi = float(np.min(first.u)), float(np.max(first.u))
    w_lo, w_hi = float(np.min(first.w)), float(np.max(first.w))
    ranges_ok = all(
        contained(s.u, u_lo, u_hi) and contained(s.w, w_lo, w_hi) for s in history
    )

    step_u = step_w = cum_u = cum_w = 0.0
    for prev, nxt in zip(history[:-1], history[1:]):
        ratios = l1_time_ratios(prev, nxt, first, dx, L, dt, tv0_u, tv0_w)
        step_u = max(step_u, ratios[0])
        step_w = max(step_w, ratios[1])
        cum_u = max(cum_u, ratios[2])
        cum_w = max(cum_w, ratios[3])

    return CompactnessReport(tv_u, tv_w, tv_ok, ranges_ok, step_u, step_w, cum_u, cum_w)


# =============================================================================
# RUN OBSERVER
# =============================================================================

@dataclass
class LedgerSummary:
    """Pass/fail of every streamed check over a run."""
    steps: int = 0
    worst_entropy: float = float("-inf")
    worst_ledger_slack: float = float("inf")
    worst_cell_slack: Optional[float] = None
    worst_mass_drift: float = 0.0
    coefficients_ok: bool = True
    tv_non_increasing: bool = True
    ranges_contained: bool = True
    l1_time_ratio: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


class Ledger:
    """
    Run observer recording one LedgerRecord per layer and streaming checks.

    Pass an instance in the observers list of scheme.run; call start() with
    the initial layer first.

    Args:
        grid: Grid of the run
        cfg: Scheme configuration of the run
        entropy_grid: Size of the entropy pair grid (0 disables the check)
        check_cells: Evaluate per-cell dissipation (needs recorded traces)
        check_l1_time: Track the L1-in-time bounds against the initial layer
    """

    def __init__(
        self,
        grid: Grid1D,
        cfg: SchemeConfig,
        entropy_grid: int = 9,
        check_cells: bool = False,
        check_l1_time: bool = True,
        entropy_tol: float = ENTROPY_TOLERANCE,
        ledger_tol: float = LEDGER_TOLERANCE,
        mass_tol: float = MASS_TOLERANCE,
    ):
        self.grid = grid
        self.cfg = cfg
        self.entropy_grid = entropy_grid
        self.check_cells = check_cells
        self.check_l1_time = check_l1_time
        self.entropy_tol = entropy_tol
        self.ledger_tol = ledger_tol
        self.mass_tol = mass_tol
        self.records: List[LedgerRecord] = []
        self.summary = LedgerSummary()
        self.pairs: List[EntropyPair] = []
        self._dissipation = 0.0
        self._l2_scale = 1.0
        self._range_u = (0.0, 0.0)
        self._range_w = (0.0, 0.0)
        self._first: Optional[FieldState] = None
        self._tv0 = (0.0, 0.0)
        self._lipschitz = 0.0
        self._dt = 0.0

    def _record(self, state: FieldState, entropy_max: float = 0.0, slack: float = 0.0) -> LedgerRecord:
        dx = self.grid.dx
        record = LedgerRecord(
            n=state.step_index,
            t=state.t,
            tv_u=total_variation(state.u),
            tv_w=total_variation(state.w),
            range_u=(float(np.min(state.u)), float(np.max(state.u))),
            range_w=(float(np.min(state.w)), float(np.max(state.w))),
            mass=mass(state, dx),
            l2_u=float(dx * np.sum(state.u ** 2)),
            l2_w=float(dx * np.sum(state.w ** 2)),
            energy_u=_energy(state.u, dx),
            energy_w=_energy(state.w, dx),
            dissipation=self._dissipation,
            entropy_residual_max=entropy_max,
            ledger_slack=slack,
        )
        self.records.append(record)
        return record

    def start(self, initial: FieldState) -> None:
        self.records = []
        self.summary = LedgerSummary()
        self._dissipation = 0.0
        if self.entropy_grid > 0:
            self.pairs = entropy_pairs(initial.u, initial.w, self.cfg.a, self.entropy_grid)
        first = self._record(initial)
        self._l2_scale = max(first.l2_sum, np.finfo(float).tiny)
        self._range_u = first.range_u
        self._range_w = first.range_w
        self._first = initial.copy()
        self._tv0 = (first.tv_u, first.tv_w)
        self._lipschitz = lipschitz_on(self.cfg.flux, *first.range_u)
        self._dt = 0.0

    def _fail(self, message: str) -> None:
        if len(self.summary.failures) < 20:
            self.summary.failures.append(message)
        logger.debug(message)

    def __call__(self, prev: FieldState, next: FieldState, report: StepReport) -> None:
        if not self.records:
            self.start(prev)
        f, a, dx = self.cfg.flux, self.cfg.a, self.grid.dx
        n = next.step_index
        s = self.summary
        s.steps += 1

        entropy_max = 0.0
        if self.pairs:
            entropy_max, scaled = max_entropy_residual(prev, next, self.pairs, f, report.dt, dx)
            s.worst_entropy = max(s.worst_entropy, scaled)
            if scaled > self.entropy_tol:
                self._fail(f"step {n}: entropy residual {entropy_max:.3e}")

        slack = ledger_slack(prev, next, f, dx, a)
        s.worst_ledger_slack = min(s.worst_ledger_slack, slack)
        if slack < -self.ledger_tol * self._l2_scale:
            self._fail(f"step {n}: energy ledger slack {slack:.3e}")

        if self.check_cells and report.trace_left is not None:
            cells = per_cell_dissipation(prev, next, report, f, report.dt, dx, a)
            worst = float(np.min(cells))
            scale = dx * max(1.0, float(np.max(prev.u ** 2 + prev.w ** 2)))
            s.worst_cell_slack = worst if s.worst_cell_slack is None else min(s.worst_cell_slack, worst)
            if worst < -self.ledger_tol * scale:
                self._fail(f"step {n}: cell dissipation slack {worst:.3e}")

        drift = mass_drift(prev, next, f, dx)
        s.worst_mass_drift = max(s.worst_mass_drift, abs(drift))
        mass_scale = max(1.0, dx * float(np.sum(np.abs(prev.u) + np.abs(prev.w))))
        if abs(drift) > self.mass_tol * mass_scale:
            self._fail(f"step {n}: mass drift {drift:.3e}")

        if not coefficient_bounds_ok(report):
            s.coefficients_ok = False
            self._fail(f"step {n}: increment coefficient outside [0, 1/2]")

        self._dissipation += a * dx * float(np.sum(np.abs(next.w - prev.w)))
        before = self.records[-1]
        record = self._record(next, entropy_max, slack)

        if (record.tv_u > before.tv_u + MONOTONE_TOLERANCE * max(1.0, before.tv_u)
                or record.tv_w > before.tv_w + MONOTONE_TOLERANCE * max(1.0, before.tv_w)):
            s.tv_non_increasing = False
            self._fail(f"step {n}: total variation increased")

        lo_u, hi_u = self._range_u
        lo_w, hi_w = self._range_w
        slack_u = MONOTONE_TOLERANCE * max(1.0, abs(lo_u), abs(hi_u))
        slack_w = MONOTONE_TOLERANCE * max(1.0, abs(lo_w), abs(hi_w))
        if (record.range_u[0] < lo_u - slack_u or record.range_u[1] > hi_u + slack_u
                or record.range_w[0] < lo_w - slack_w or record.range_w[1] > hi_w + slack_w):
            s.ranges_contained = False
            self._fail(f"step {n}: range grew beyond the initial data")

        if self.check_l1_time and self._first is not None:
            self._dt = max(self._dt, report.dt)
            ratio = max(l1_time_ratios(
                prev, next, self._first, dx, self._lipschitz, self._dt, *self._tv0
            ))
            s.l1_time_ratio = max(s.l1_time_ratio, ratio)
            if ratio > 1.0 + MONOTONE_TOLERANCE:
                self._fail(f"step {n}: L1 change in time exceeds 2 L TV(v0) bound ({ratio:.4f})")

    def write_csv(self, path: Union[str, Path], precision: int = 10) -> Path:
        """Write the ledger with one row per recorded layer."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rows = np.array([r.to_row() for r in self.records], dtype=float)
        fmt = ["%d"] + [f"%.{precision}g"] * (len(LEDGER_COLUMNS) - 1)
        np.savetxt(path, rows, fmt=fmt, delimiter=",", header=",".join(LEDGER_COLUMNS), comments="")
        return path
