"""
CLI: Command-line interface for playfv.

Runs scenarios and presets, solves single Riemann problems, performs
refinement and stability studies and re-reads the diagnostics of earlier runs.

Exit codes: 0 success, 1 error, 2 run finished but a diagnostic failed.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import create_default_config, get_config_path, load_config
from .flux import available_fluxes, get_flux
from .hysteresis import PlayState
from .riemann import RiemannProblem
from .scenarios import get_preset, list_presets, load_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DIAGNOSTICS = 2


def _setup_logging(verbosity: int, configured: str) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, configured, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_settings(args):
    config = load_config(Path(args.config) if args.config else None)
    if getattr(args, "output_dir", None):
        config.output.output_dir = Path(args.output_dir)
    return config


def cmd_run(args):
    """Run a scenario file or preset."""
    from .runner import run_scenario

    config = _load_settings(args)
    scenario = load_scenario(args.scenario)
    if args.dx:
        scenario = scenario.with_dx(args.dx)

    result = run_scenario(scenario, config, write=not args.no_write)
    summary = result.ledger.summary

    if args.json:
        print(json.dumps(result.to_dict(), indent=2))
    else:
        print(f"\nScenario: {scenario.name}")
        print("=" * 60)
        print(f"Cells:           {result.final.u.size}")
        print(f"Time step:       {result.dt:.6g} ({summary.steps} steps)")
        for t_out, (eu, ew) in result.exact_errors.items():
            print(f"L1 error t={t_out:g}: u={eu:.4e}  w={ew:.4e}")
        if result.ledger.records:
            first, last = result.ledger.records[0], result.ledger.records[-1]
            print(f"Energy:          {first.energy:.6g} -> {last.energy:.6g}")
        print(f"Diagnostics:     {'passed' if summary.passed else 'FAILED'}")
        for failure in summary.failures:
            print(f"  {failure}")
        if result.run_dir:
            print(f"\nArtifacts in {result.run_dir}")

    return EXIT_OK if summary.passed else EXIT_DIAGNOSTICS


def cmd_riemann(args):
    """Solve one Riemann problem exactly."""
    from .runner import riemann_report

    problem = RiemannProblem(
        PlayState(args.ul, args.wl), PlayState(args.ur, args.wr), args.a, get_flux(args.flux)
    )
    report = riemann_report(problem, args.t, (args.x_min, args.x_max), args.samples)
    if args.csv:
        report.write_csv(Path(args.csv))

    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.text)
        if args.csv:
            print(f"\nSamples written to {args.csv}")
    return EXIT_OK


def cmd_converge(args):
    """Grid refinement study."""
    from .runner import convergence_study

    _load_settings(args)
    scenario = load_scenario(args.scenario)
    table = convergence_study(scenario, levels=args.levels)

    if args.json:
        print(json.dumps(table.to_dict(), indent=2))
    else:
        print(f"\nConvergence: {scenario.name} (reference: {table.reference})")
        print("-" * 60)
        print(f"{'dx':>12}  {'L1 error u':>12}  {'L1 error w':>12}")
        for dx, eu, ew in zip(table.dx, table.errors_u, table.errors_w):
            print(f"{dx:>12.5g}  {eu:>12.4e}  {ew:>12.4e}")
        print(f"\nObserved order: {table.observed_order:.3f}")
        if not table.monotone:
            print("Warning: errors do not decrease monotonically")
    return EXIT_OK


def cmd_stability(args):
    """L1 contraction and history checks against a perturbed run."""
    from .runner import stability_study

    config = _load_settings(args)
    scenario = load_scenario(args.scenario)
    if args.dx:
        scenario = scenario.with_dx(args.dx)
    report = stability_study(scenario, args.delta, config)

    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        contraction = report.contraction
        print(f"\nStability: {scenario.name} (delta={report.delta:g}, {report.steps} steps)")
        print("-" * 60)
        print(f"L1 distance:     {contraction.distances[0]:.6g} -> {contraction.distances[-1]:.6g}")
        print(f"Max increase:    {contraction.max_increase:.3e} (tolerance {contraction.tolerance:.3e})")
        print(f"Worst slack:     {report.energy.worst_slack:.3e}")
        print(f"TV non-increase: {report.compactness.tv_non_increasing}")
        print(f"Ranges kept:     {report.compactness.ranges_contained}")
        print(f"Diagnostics:     {'passed' if report.passed else 'FAILED'}")
    return EXIT_OK if report.passed else EXIT_DIAGNOSTICS


def cmd_diag(args):
    """Show the diagnostics recorded in a run directory."""
    from .runner import load_run

    metadata = load_run(Path(args.run_dir))
    result = metadata.get("result", {})
    diagnostics = result.get("diagnostics", {})
    passed = bool(diagnostics.get("passed", False))

    if args.json:
        print(json.dumps(result, indent=2))
    else:
        print(f"\nRun: {result.get('scenario')} ({result.get('steps')} steps)")
        print("=" * 60)
        for key in ("worst_entropy", "worst_ledger_slack", "worst_cell_slack",
                    "worst_mass_drift", "coefficients_ok", "tv_non_increasing",
                    "ranges_contained", "l1_time_ratio"):
            if key in diagnostics:
                print(f"{key + ':':<22} {diagnostics[key]}")
        print(f"{'passed:':<22} {passed}")
        for failure in diagnostics.get("failures", []):
            print(f"  {failure}")
    return EXIT_OK if passed else EXIT_DIAGNOSTICS


def cmd_presets(args):
    """List shipped scenarios."""
    names = list_presets()
    if args.json:
        print(json.dumps([get_preset(n).to_dict() for n in names], indent=2))
        return EXIT_OK
    for name in names:
        scenario = get_preset(name)
        print(f"{name:<18} {scenario.description}")
    return EXIT_OK


def cmd_fluxes(args):
    """List registered fluxes."""
    for name in available_fluxes():
        print(name)
    return EXIT_OK


def cmd_config(args):
    """Show or create configuration."""
    config_path = Path(args.config) if args.config else get_config_path()

    if args.init:
        try:
            path = create_default_config(config_path, force=args.force)
        except FileExistsError:
            print(f"Config already exists at {config_path}")
            print("Use --force to overwrite.")
            return EXIT_ERROR
        print(f"Created config at {path}")
        return EXIT_OK

    config = load_config(config_path)
    if args.json:
        print(json.dumps(config.to_dict(), indent=2))
        return EXIT_OK
    if config_path.exists():
        print(f"Config location: {config_path}\n")
    else:
        print(f"No config file at {config_path}; showing defaults")
        print("Run 'playfv config --init' to create one.\n")
    for section, values in config.to_dict().items():
        if isinstance(values, dict):
            print(f"{section}:")
            for key, value in values.items():
                print(f"  {key}: {value}")
        else:
            print(f"{section}: {values}")
    return EXIT_OK


def cmd_plot(args):
    """Render snapshots of a run directory."""
    try:
        from .plotting import plot_run
    except ImportError:
        print("Error: plotting needs matplotlib (pip install playfv[plot])", file=sys.stderr)
        return EXIT_ERROR
    try:
        written = plot_run(Path(args.run_dir))
    except ImportError:
        print("Error: plotting needs matplotlib (pip install playfv[plot])", file=sys.stderr)
        return EXIT_ERROR
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="playfv",
        description="Finite volume solver for conservation laws with Play hysteresis",
    )
    from importlib.metadata import PackageNotFoundError, version as pkg_version
    try:
        installed = pkg_version("playfv")
    except PackageNotFoundError:
        from . import __version__ as installed
    parser.add_argument("--version", action="version", version=f"%(prog)s {installed}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="More logging (-v info, -vv debug)",
    )
    parser.add_argument("--config", help="Config file (default ~/.playfv/config.yaml)")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # run command
    run_parser = subparsers.add_parser("run", help="Run a scenario file or preset")
    run_parser.add_argument("scenario", help="Scenario YAML file or preset name")
    run_parser.add_argument("--output-dir", help="Root directory for run artifacts")
    run_parser.add_argument("--dx", type=float, help="Override the cell width")
    run_parser.add_argument("--no-write", action="store_true", help="Do not write artifacts")
    run_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # riemann command
    riemann_parser = subparsers.add_parser("riemann", help="Solve one Riemann problem exactly")
    riemann_parser.add_argument("--ul", type=float, required=True, help="Left u")
    riemann_parser.add_argument("--wl", type=float, required=True, help="Left w")
    riemann_parser.add_argument("--ur", type=float, required=True, help="Right u")
    riemann_parser.add_argument("--wr", type=float, required=True, help="Right w")
    riemann_parser.add_argument("--a", type=float, default=1.0, help="Strip half-width (default: 1)")
    riemann_parser.add_argument(
        "--flux", default="burgers", choices=available_fluxes(), help="Flux (default: burgers)"
    )
    riemann_parser.add_argument("--t", type=float, default=1.0, help="Sampling time (default: 1)")
    riemann_parser.add_argument("--x-min", type=float, default=-2.0)
    riemann_parser.add_argument("--x-max", type=float, default=2.0)
    riemann_parser.add_argument("--samples", type=int, default=401)
    riemann_parser.add_argument("--csv", help="Write x,u,w samples to this file")
    riemann_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # converge command
    converge_parser = subparsers.add_parser("converge", help="Grid refinement study")
    converge_parser.add_argument("scenario", help="Scenario YAML file or preset name")
    converge_parser.add_argument(
        "--levels", type=int, default=3, help="Number of dyadic levels (default: 3)"
    )
    converge_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # stability command
    stability_parser = subparsers.add_parser(
        "stability", help="L1 contraction against a perturbed run"
    )
    stability_parser.add_argument("scenario", help="Scenario YAML file or preset name")
    stability_parser.add_argument(
        "--delta", type=float, default=0.1, help="Shift of u and w right of the split (default: 0.1)"
    )
    stability_parser.add_argument("--dx", type=float, help="Override the cell width")
    stability_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # diag command
    diag_parser = subparsers.add_parser("diag", help="Show diagnostics of a run directory")
    diag_parser.add_argument("run_dir", help="Run directory")
    diag_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # presets command
    presets_parser = subparsers.add_parser("presets", help="List shipped scenarios")
    presets_parser.add_argument("--json", action="store_true", help="Output as JSON")

    subparsers.add_parser("fluxes", help="List registered fluxes")

    # config command
    config_parser = subparsers.add_parser("config", help="Show or create configuration")
    config_parser.add_argument("--init", action="store_true", help="Create default config")
    config_parser.add_argument("--force", action="store_true", help="Overwrite existing config")
    config_parser.add_argument("--json", action="store_true", help="Output as JSON")

    # plot command
    plot_parser = subparsers.add_parser("plot", help="Render snapshots (needs matplotlib)")
    plot_parser.add_argument("run_dir", help="Run directory")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_OK

    commands = {
        "run": cmd_run,
        "riemann": cmd_riemann,
        "converge": cmd_converge,
        "stability": cmd_stability,
        "diag": cmd_diag,
        "presets": cmd_presets,
        "fluxes": cmd_fluxes,
        "config": cmd_config,
        "plot": cmd_plot,
    }

    try:
        configured = load_config(Path(args.config) if args.config else None).log_level
    except ValueError:
        configured = "WARNING"
    _setup_logging(args.verbose, configured)

    handler = commands.get(args.command)
    if handler is None:
        parser.print_help()
        return EXIT_ERROR
    try:
        return handler(args)
    except (ValueError, RuntimeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
