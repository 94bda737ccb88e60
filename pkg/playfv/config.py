"""
Configuration loader for playfv.

Settings come from defaults, an optional YAML file and PLAYFV_*
environment variables. Scenario files are separate (see scenarios.py).
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass
class OutputConfig:
    """Where and what a run writes."""
    output_dir: Path = field(default_factory=lambda: Path("playfv-runs"))
    write_snapshots: bool = True
    write_exact: bool = True
    write_ledger: bool = True
    precision: int = 10  # significant digits in CSV files


@dataclass
class DiagnosticsConfig:
    """Which monitors run and how strict they are."""
    entropy_grid: int = 9  # 0 disables the entropy check
    entropy_tol: float = 1e-12
    ledger_tol: float = 1e-10
    mass_tol: float = 1e-12
    contraction_tol: float = 1e-10
    per_cell: bool = True  # Riemann scenarios only; needs exact traces
    l1_time: bool = True


@dataclass
class PlayfvConfig:
    """Main playfv configuration."""
    log_level: str = "WARNING"
    output: OutputConfig = field(default_factory=OutputConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["output"]["output_dir"] = str(self.output.output_dir)
        return data


def get_config_path() -> Path:
    """Get path to config file."""
    return Path.home() / ".playfv" / "config.yaml"


def load_config(config_path: Optional[Path] = None) -> PlayfvConfig:
    """
    Load configuration from YAML file and environment variables.

    Priority (highest to lowest):
    1. Environment variables (PLAYFV_*)
    2. Config file values
    3. Default values

    Args:
        config_path: Path to config file. Defaults to ~/.playfv/config.yaml

    Returns:
        Loaded configuration
    """
    if config_path is None:
        config_path = get_config_path()

    config = PlayfvConfig()

    if config_path.exists():
        with open(config_path) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise ValueError(f"Config file {config_path} must hold a mapping")
        config = _merge_config(config, data)

    config = _apply_env_overrides(config)
    _validate(config)
    return config


def _merge_config(config: PlayfvConfig, data: Dict[str, Any]) -> PlayfvConfig:
    """Merge YAML data into config dataclass."""
    if "log_level" in data:
        config.log_level = str(data["log_level"]).upper()

    if "output" in data:
        out = data["output"] or {}
        if "output_dir" in out:
            config.output.output_dir = Path(out["output_dir"]).expanduser()
        if "write_snapshots" in out:
            config.output.write_snapshots = bool(out["write_snapshots"])
        if "write_exact" in out:
            config.output.write_exact = bool(out["write_exact"])
        if "write_ledger" in out:
            config.output.write_ledger = bool(out["write_ledger"])
        if "precision" in out:
            config.output.precision = int(out["precision"])

    if "diagnostics" in data:
        diag = data["diagnostics"] or {}
        if "entropy_grid" in diag:
            config.diagnostics.entropy_grid = int(diag["entropy_grid"])
        if "entropy_tol" in diag:
            config.diagnostics.entropy_tol = float(diag["entropy_tol"])
        if "ledger_tol" in diag:
            config.diagnostics.ledger_tol = float(diag["ledger_tol"])
        if "mass_tol" in diag:
            config.diagnostics.mass_tol = float(diag["mass_tol"])
        if "contraction_tol" in diag:
            config.diagnostics.contraction_tol = float(diag["contraction_tol"])
        if "per_cell" in diag:
            config.diagnostics.per_cell = bool(diag["per_cell"])
        if "l1_time" in diag:
            config.diagnostics.l1_time = bool(diag["l1_time"])

    return config


def _apply_env_overrides(config: PlayfvConfig) -> PlayfvConfig:
    """Apply environment variable overrides."""
    if os.environ.get("PLAYFV_OUTPUT_DIR"):
        config.output.output_dir = Path(os.environ["PLAYFV_OUTPUT_DIR"]).expanduser()
    if os.environ.get("PLAYFV_LOG_LEVEL"):
        config.log_level = os.environ["PLAYFV_LOG_LEVEL"].upper()
    if os.environ.get("PLAYFV_ENTROPY_GRID"):
        try:
            config.diagnostics.entropy_grid = int(os.environ["PLAYFV_ENTROPY_GRID"])
        except ValueError:
            raise ValueError(
                f"PLAYFV_ENTROPY_GRID must be an integer, got {os.environ['PLAYFV_ENTROPY_GRID']!r}"
            ) from None
    return config


def _validate(config: PlayfvConfig) -> None:
    if config.log_level not in LOG_LEVELS:
        raise ValueError(f"Unknown log level '{config.log_level}'. Options: {', '.join(LOG_LEVELS)}")
    if config.diagnostics.entropy_grid < 0:
        raise ValueError(f"entropy_grid must be >= 0, got {config.diagnostics.entropy_grid}")
    if config.output.precision < 1:
        raise ValueError(f"precision must be >= 1, got {config.output.precision}")


def create_default_config(config_path: Optional[Path] = None, force: bool = False) -> Path:
    """
    Create default configuration file.

    Args:
        config_path: Path to config file. Defaults to ~/.playfv/config.yaml
        force: Overwrite existing config

    Returns:
        Path to created config file
    """
    if config_path is None:
        config_path = get_config_path()

    if config_path.exists() and not force:
        raise FileExistsError(f"Config already exists at {config_path}")

    config_path.parent.mkdir(parents=True, exist_ok=True)

    default_config = """# playfv configuration

log_level: WARNING  # DEBUG, INFO, WARNING, ERROR (env: PLAYFV_LOG_LEVEL)

# Run artifacts
output:
  output_dir: playfv-runs  # env: PLAYFV_OUTPUT_DIR
  write_snapshots: true
  write_exact: true        # exact Riemann fan next to each snapshot
  write_ledger: true
  precision: 10            # significant digits

# Monitors evaluated during runs
diagnostics:
  entropy_grid: 9          # pairs per axis, 0 disables (env: PLAYFV_ENTROPY_GRID)
  entropy_tol: 1.0e-12
  ledger_tol: 1.0e-10
  mass_tol: 1.0e-12
  contraction_tol: 1.0e-10
  per_cell: true
  l1_time: true
"""

    with open(config_path, "w") as f:
        f.write(default_config)

    return config_path
