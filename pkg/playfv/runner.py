"""
Scenario execution and artifact writing.

run_scenario runs the scheme through the output times of a scenario with
the diagnostics attached and writes

    <output_dir>/<name>/
        snapshot_t<t>.csv          x,u,w of the numerical solution
        exact_t<t>.csv             x,u,w of the exact fan (Riemann data)
        comparison_full_t<t>.csv   x,u without hysteresis, flux f
        comparison_half_t<t>.csv   x,u without hysteresis, flux f/2
        ledger.csv                 one row per time level
        metadata.yaml              scenario, grid, time step, check results

stability_study records a run and a perturbed copy and checks the full
histories for L1 contraction, the energy inequality and the compactness
bounds.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from . import __version__
from .config import PlayfvConfig, load_config
from .diagnostics import (
    CompactnessReport,
    ContractionReport,
    Ledger,
    LedgerCheckReport,
    compactness_monitors,
    hysteresis_ledger_check,
    l1_contraction_check,
)
from .flux import lipschitz_on
from .hysteresis import PlayState
from .riemann import Rarefaction, RiemannProblem, Shock, StationaryWContact, WaveFan, sample, solve
from .scenarios import ComparisonMode, Scenario
from .scheme import (
    FieldState,
    Grid1D,
    SchemeConfig,
    StepReport,
    cfl_dt,
    project_initial,
    run,
)

logger = logging.getLogger(__name__)

# Boundary cells may drift by this much (relative to the data scale)
BOUNDARY_TOLERANCE = 1e-10

# The large-a device uses a = LARGE_A_FACTOR * data range
LARGE_A_FACTOR = 1e3


class BoundaryTouchError(RuntimeError):
    """Waves reached the ends of the computational domain."""

    def __init__(self, step_index: int, side: str, t: float):
        self.step_index = step_index
        self.side = side
        super().__init__(
            f"Solution reached the {side} boundary at step {step_index} (t={t:.6g}); "
            f"widen the domain"
        )


class BoundaryMonitor:
    """Run observer raising BoundaryTouchError when an end cell changes."""

    def __init__(self, initial: FieldState):
        self.left = (float(initial.u[0]), float(initial.w[0]))
        self.right = (float(initial.u[-1]), float(initial.w[-1]))
        scale = max(1.0, float(np.max(np.abs(initial.u))), float(np.max(np.abs(initial.w))))
        self.tol = BOUNDARY_TOLERANCE * scale

    def __call__(self, prev: FieldState, next: FieldState, report: StepReport) -> None:
        for side, idx, ref in (("left", 0, self.left), ("right", -1, self.right)):
            if (abs(next.u[idx] - ref[0]) > self.tol
                    or abs(next.w[idx] - ref[1]) > self.tol):
                raise BoundaryTouchError(next.step_index, side, next.t)


@dataclass
class RunResult:
    """Outcome of run_scenario."""
    scenario: Scenario
    run_dir: Optional[Path]
    final: FieldState
    snapshots: Dict[float, FieldState]
    ledger: Ledger
    dt: float
    exact_errors: Dict[float, Tuple[float, float]] = field(default_factory=dict)
    comparisons: Dict[str, Dict[float, np.ndarray]] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.ledger.summary.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario.name,
            "run_dir": str(self.run_dir) if self.run_dir else None,
            "dt": self.dt,
            "steps": self.final.step_index,
            "passed": self.passed,
            "elapsed_s": round(self.elapsed, 3),
            "exact_l1_errors": {
                f"{t:g}": {"u": e[0], "w": e[1]} for t, e in self.exact_errors.items()
            },
            "diagnostics": self.ledger.summary.to_dict(),
            "files": [str(p) for p in self.files],
        }


def build_run(scenario: Scenario) -> Tuple[Grid1D, SchemeConfig, FieldState]:
    """Grid, scheme configuration and projected initial layer of a scenario."""
    grid = Grid1D.from_domain(scenario.domain[0], scenario.domain[1], scenario.dx)
    cfg = SchemeConfig(scenario.flux_obj, scenario.a, scenario.cfl_fraction)
    u0, w0 = scenario.initial.profiles()
    initial = project_initial(u0, w0, grid, scenario.a)
    return grid, cfg, initial


def sample_exact(fan: WaveFan, x: np.ndarray, t: float, x0: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Exact solution of a Riemann fan at points x and time t > 0."""
    u = np.empty_like(x)
    w = np.empty_like(x)
    for i, xi in enumerate((x - x0) / t):
        state = sample(fan, float(xi))
        u[i], w[i] = state.u, state.w
    return u, w


def exact_l1_error(scenario: Scenario, state: FieldState, grid: Grid1D) -> Tuple[float, float]:
    """Per-component L1 distance to the exact fan sampled at cell centres."""
    fan = solve(scenario.riemann_problem())
    x0 = float(scenario.initial.params.get("x0", 0.0))
    u, w = sample_exact(fan, grid.centers, state.t, x0)
    return (
        float(grid.dx * np.sum(np.abs(state.u - u))),
        float(grid.dx * np.sum(np.abs(state.w - w))),
    )


def _write_columns(path: Path, header: str, columns: List[np.ndarray], precision: int) -> Path:
    np.savetxt(
        path, np.column_stack(columns), fmt=f"%.{precision}g", delimiter=",",
        header=header, comments="",
    )
    return path


def _time_tag(t: float) -> str:
    return f"t{t:g}"


def _comparison_runs(
    scenario: Scenario, grid: Grid1D, dt: float
) -> Dict[str, Dict[float, np.ndarray]]:
    """
    Runs without hysteresis on the same grid and time step.

    Setting w0 = u0 and a far larger than the data range keeps w frozen, so
    u solves the plain conservation law with flux f ("full") or f/2
    ("half").
    """
    u0, w0 = scenario.initial.profiles()
    points = np.linspace(scenario.domain[0], scenario.domain[1], 2001)
    values = np.concatenate([u0(points), w0(points)])
    big_a = LARGE_A_FACTOR * max(1.0, float(np.max(values) - np.min(values)))

    results: Dict[str, Dict[float, np.ndarray]] = {}
    for label, factor in (("full", 1.0), ("half", 0.5)):
        flux = scenario.flux_obj if factor == 1.0 else scenario.flux_obj.scaled(factor)
        cfg = SchemeConfig(flux, big_a, scenario.cfl_fraction)
        state = project_initial(u0, u0, grid, big_a)
        snaps: Dict[float, np.ndarray] = {}
        for t_out in scenario.output_times:
            state = run(state, cfg, grid, t_out, dt=dt)
            snaps[t_out] = state.u.copy()
        results[label] = snaps
        logger.debug(f"Comparison run '{label}' done ({state.step_index} steps)")
    return results


def run_scenario(
    scenario: Scenario,
    config: Optional[PlayfvConfig] = None,
    output_dir: Optional[Path] = None,
    write: bool = True,
) -> RunResult:
    """
    Run a scenario with all diagnostics attached and write its artifacts.

    Args:
        scenario: Scenario to run
        config: Settings; load_config() when None
        output_dir: Root for run directories (overrides the config)
        write: Write CSV and metadata files

    Returns:
        RunResult with snapshots, ledger and file list

    Raises:
        BoundaryTouchError: If waves reach the domain ends and the scenario
            asks for the boundary check
        StripViolationError: If a cell leaves the strip
    """
    config = config or load_config()
    started = time.perf_counter()
    grid, cfg, initial = build_run(scenario)
    dt = cfl_dt(cfg, grid, initial)
    diag = config.diagnostics
    logger.info(
        f"Running {scenario.name}: {grid.n_cells} cells, dx={grid.dx:g}, dt={dt:.6g}, "
        f"t_end={scenario.t_end:g}"
    )

    ledger = Ledger(
        grid, cfg,
        entropy_grid=diag.entropy_grid,
        check_cells=diag.per_cell and scenario.is_riemann,
        check_l1_time=diag.l1_time,
        entropy_tol=diag.entropy_tol,
        ledger_tol=diag.ledger_tol,
        mass_tol=diag.mass_tol,
    )
    ledger.start(initial)
    observers = [ledger]
    if scenario.boundary_check:
        observers.insert(0, BoundaryMonitor(initial))

    snapshots: Dict[float, FieldState] = {}
    state = initial
    for t_out in scenario.output_times:
        state = run(state, cfg, grid, t_out, observers=observers, dt=dt,
                    record_traces=ledger.check_cells)
        snapshots[t_out] = state.copy()

    result = RunResult(scenario, None, state, snapshots, ledger, dt)
    if scenario.is_riemann:
        for t_out, snap in snapshots.items():
            result.exact_errors[t_out] = exact_l1_error(scenario, snap, grid)
    if scenario.comparison is ComparisonMode.NON_HYSTERETIC_PAIR:
        result.comparisons = _comparison_runs(scenario, grid, dt)

    result.elapsed = time.perf_counter() - started
    summary = ledger.summary
    if summary.passed:
        logger.info(f"{scenario.name}: all diagnostics passed ({summary.steps} steps)")
    else:
        logger.warning(f"{scenario.name}: {len(summary.failures)} diagnostic failure(s)")

    if write:
        root = output_dir or config.output.output_dir
        result.run_dir = Path(root) / scenario.name
        _write_artifacts(result, grid, config)
    return result


def _write_artifacts(result: RunResult, grid: Grid1D, config: PlayfvConfig) -> None:
    run_dir = result.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    out = config.output
    scenario = result.scenario
    x = grid.centers

    if out.write_snapshots:
        for t_out, snap in result.snapshots.items():
            path = run_dir / f"snapshot_{_time_tag(t_out)}.csv"
            result.files.append(_write_columns(path, "x,u,w", [x, snap.u, snap.w], out.precision))
    if out.write_exact and scenario.is_riemann:
        fan = solve(scenario.riemann_problem())
        x0 = float(scenario.initial.params.get("x0", 0.0))
        for t_out in result.snapshots:
            u, w = sample_exact(fan, x, t_out, x0)
            path = run_dir / f"exact_{_time_tag(t_out)}.csv"
            result.files.append(_write_columns(path, "x,u,w", [x, u, w], out.precision))
    for label, snaps in result.comparisons.items():
        for t_out, u in snaps.items():
            path = run_dir / f"comparison_{label}_{_time_tag(t_out)}.csv"
            result.files.append(_write_columns(path, "x,u", [x, u], out.precision))
    if out.write_ledger:
        result.files.append(result.ledger.write_csv(run_dir / "ledger.csv", out.precision))

    metadata = {
        "playfv_version": __version__,
        "scenario": scenario.to_dict(),
        "grid": {"x_min": grid.x_min, "dx": grid.dx, "n_cells": grid.n_cells},
        "result": result.to_dict(),
    }
    meta_path = run_dir / "metadata.yaml"
    with open(meta_path, "w") as f:
        yaml.safe_dump(metadata, f, sort_keys=False)
    result.files.append(meta_path)
    logger.info(f"Wrote {len(result.files)} file(s) to {run_dir}")


def load_run(run_dir: Path) -> Dict[str, Any]:
    """Read metadata.yaml of a run directory."""
    meta_path = Path(run_dir) / "metadata.yaml"
    if not meta_path.exists():
        raise ValueError(f"No metadata.yaml in {run_dir}")
    with open(meta_path) as f:
        return yaml.safe_load(f)


# =============================================================================
# CONVERGENCE
# =============================================================================

@dataclass
class ConvergenceTable:
    """L1 errors per grid level and the fitted order."""
    scenario: str
    reference: str  # "exact" or "finest"
    dx: List[float]
    errors_u: List[float]
    errors_w: List[float]
    observed_order: float
    monotone: bool

    @property
    def errors(self) -> List[float]:
        return [eu + ew for eu, ew in zip(self.errors_u, self.errors_w)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "reference": self.reference,
            "levels": [
                {"dx": dx, "error_u": eu, "error_w": ew}
                for dx, eu, ew in zip(self.dx, self.errors_u, self.errors_w)
            ],
            "observed_order": self.observed_order,
            "monotone": self.monotone,
        }


def _restrict(fine: np.ndarray, n_coarse: int) -> np.ndarray:
    if fine.size % n_coarse:
        raise ValueError(f"Grid of {fine.size} cells does not nest in {n_coarse} cells")
    return fine.reshape(n_coarse, -1).mean(axis=1)


def _final_layer(scenario: Scenario) -> Tuple[Grid1D, FieldState]:
    grid, cfg, initial = build_run(scenario)
    return grid, run(initial, cfg, grid, scenario.t_end)


def convergence_study(
    scenario: Scenario,
    refinements: Optional[List[float]] = None,
    levels: int = 3,
) -> ConvergenceTable:
    """
    L1 errors at the final output time over a sequence of grids.

    Riemann scenarios are measured against the exact fan; other scenarios
    against the finest grid, which is then run one extra level finer than
    the listed refinements. A non-monotone error sequence is logged, not
    raised.

    Args:
        scenario: Scenario to refine
        refinements: Cell widths, coarse to fine; scenario.dx halved
            levels - 1 times when None
        levels: Number of levels when refinements is None (>= 3)
    """
    if refinements is None:
        if levels < 3:
            raise ValueError(f"Need at least 3 levels, got {levels}")
        refinements = [scenario.dx / 2 ** k for k in range(levels)]
    refinements = sorted(refinements, reverse=True)
    if len(refinements) < 3:
        raise ValueError("Need at least 3 refinement levels")

    errors_u: List[float] = []
    errors_w: List[float] = []
    if scenario.is_riemann:
        reference = "exact"
        for dx in refinements:
            grid, state = _final_layer(scenario.with_dx(dx))
            eu, ew = exact_l1_error(scenario, state, grid)
            errors_u.append(eu)
            errors_w.append(ew)
            logger.info(f"{scenario.name} dx={dx:g}: L1 error u={eu:.4e} w={ew:.4e}")
    else:
        reference = "finest"
        fine_grid, fine = _final_layer(scenario.with_dx(refinements[-1] / 2))
        for dx in refinements:
            grid, state = _final_layer(scenario.with_dx(dx))
            ref_u = _restrict(fine.u, grid.n_cells)
            ref_w = _restrict(fine.w, grid.n_cells)
            errors_u.append(float(dx * np.sum(np.abs(state.u - ref_u))))
            errors_w.append(float(dx * np.sum(np.abs(state.w - ref_w))))
            logger.info(f"{scenario.name} dx={dx:g}: L1 error u={errors_u[-1]:.4e} w={errors_w[-1]:.4e}")

    total = np.array(errors_u) + np.array(errors_w)
    monotone = bool(np.all(np.diff(total) < 0))
    if not monotone:
        logger.warning(f"{scenario.name}: errors do not decrease monotonically: {total.tolist()}")
    positive = total > 0
    if np.count_nonzero(positive) >= 2:
        slope, _ = np.polyfit(np.log(np.array(refinements)[positive]), np.log(total[positive]), 1)
        order = float(slope)
    else:
        order = float("nan")
    return ConvergenceTable(scenario.name, reference, refinements, errors_u, errors_w, order, monotone)


# =============================================================================
# STABILITY STUDY
# =============================================================================

@dataclass
class StabilityReport:
    """History checks of a scenario run against a perturbed copy."""
    scenario: str
    delta: float
    steps: int
    contraction: ContractionReport
    energy: LedgerCheckReport
    compactness: CompactnessReport

    @property
    def passed(self) -> bool:
        return self.contraction.passed and self.energy.passed and self.compactness.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "delta": self.delta,
            "steps": self.steps,
            "contraction": self.contraction.to_dict(),
            "energy": self.energy.to_dict(),
            "compactness": self.compactness.to_dict(),
            "passed": self.passed,
        }


def _recorded_run(
    initial: FieldState,
    cfg: SchemeConfig,
    grid: Grid1D,
    t_end: float,
    dt: float,
    boundary_check: bool,
) -> List[FieldState]:
    history = [initial]
    observers = [lambda prev, nxt, report: history.append(nxt)]
    if boundary_check:
        observers.insert(0, BoundaryMonitor(initial))
    run(initial, cfg, grid, t_end, observers=observers, dt=dt)
    return history


def stability_study(
    scenario: Scenario,
    delta: float = 0.1,
    config: Optional[PlayfvConfig] = None,
) -> StabilityReport:
    """
    Run a scenario next to a copy whose u and w are raised by delta right
    of the split point, and check the recorded histories.

    Both fields move together, so the perturbed data stays in the strip.
    The split point is x0 of Riemann data and 0 otherwise. Both runs share
    the smaller of their CFL time steps.

    Raises:
        ValueError: If delta is 0
        BoundaryTouchError: If either run reaches the domain ends and the
            scenario asks for the boundary check
    """
    if delta == 0:
        raise ValueError("delta must be non-zero")
    config = config or load_config()
    diag = config.diagnostics
    grid, cfg, initial = build_run(scenario)
    split = float(scenario.initial.params.get("x0", 0.0)) if scenario.is_riemann else 0.0
    shift = np.where(grid.centers >= split, delta, 0.0)
    perturbed = FieldState(initial.u + shift, initial.w + shift, initial.t)
    dt = min(cfl_dt(cfg, grid, initial), cfl_dt(cfg, grid, perturbed))
    logger.info(f"Stability study {scenario.name}: delta={delta:g}, dt={dt:.6g}")

    base = _recorded_run(initial, cfg, grid, scenario.t_end, dt, scenario.boundary_check)
    other = _recorded_run(perturbed, cfg, grid, scenario.t_end, dt, scenario.boundary_check)

    L = lipschitz_on(cfg.flux, float(np.min(initial.u)), float(np.max(initial.u)))
    report = StabilityReport(
        scenario.name,
        delta,
        len(base) - 1,
        l1_contraction_check(base, other, grid.dx, tol=diag.contraction_tol),
        hysteresis_ledger_check(base, grid.dx, cfg.a, cfg.flux, tol=diag.ledger_tol),
        compactness_monitors(base, grid.dx, dt, L),
    )
    if not report.passed:
        logger.warning(f"{scenario.name}: stability study failed: {report.to_dict()}")
    return report


# =============================================================================
# RIEMANN REPORT
# =============================================================================

@dataclass
class RiemannReport:
    fan: WaveFan
    t: float
    x: np.ndarray
    u: np.ndarray
    w: np.ndarray

    @property
    def text(self) -> str:
        return describe_fan(self.fan)

    def write_csv(self, path: Path, precision: int = 10) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return _write_columns(path, "x,u,w", [self.x, self.u, self.w], precision)

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, **self.fan.to_dict()}


def describe_fan(fan: WaveFan) -> str:
    """One line per wave, left to right."""
    if not fan.waves:
        return "no waves"
    lines = []
    for wave in fan.waves:
        if isinstance(wave, Rarefaction):
            lines.append(
                f"rarefaction ({wave.w_mode.value}): u {wave.u_from:g} -> {wave.u_to:g}, "
                f"speeds [{wave.speed_from:g}, {wave.speed_to:g}]"
            )
        elif isinstance(wave, Shock):
            lines.append(
                f"shock ({wave.kind.value}): ({wave.left.u:g}, {wave.left.w:g}) -> "
                f"({wave.right.u:g}, {wave.right.w:g}), sigma={wave.sigma:g}"
            )
        elif isinstance(wave, StationaryWContact):
            lines.append(f"contact: u={wave.u:g}, w {wave.w_left:g} -> {wave.w_right:g}")
    return "\n".join(lines)


def riemann_report(
    problem: RiemannProblem,
    t: float,
    x_range: Tuple[float, float] = (-2.0, 2.0),
    samples: int = 401,
) -> RiemannReport:
    """Solve a Riemann problem and sample its fan at time t > 0."""
    if not t > 0:
        raise ValueError(f"Sampling time must be positive, got t={t}")
    if samples < 2:
        raise ValueError(f"Need at least 2 samples, got {samples}")
    fan = solve(problem)
    x = np.linspace(x_range[0], x_range[1], samples)
    u, w = sample_exact(fan, x, t)
    return RiemannReport(fan, t, x, u, w)


def shock_location(x: np.ndarray, u: np.ndarray, left: PlayState, right: PlayState) -> float:
    """
    Position where a monotone shock profile crosses the mid value of its
    two states (linear interpolation between cells).
    """
    mid = 0.5 * (left.u + right.u)
    above = u >= mid if left.u > right.u else u <= mid
    idx = int(np.argmin(above)) if not np.all(above) else x.size - 1
    if idx == 0:
        return float(x[0])
    x0, x1, u0, u1 = x[idx - 1], x[idx], u[idx - 1], u[idx]
    if u1 == u0:
        return float(x0)
    return float(x0 + (mid - u0) * (x1 - x0) / (u1 - u0))
