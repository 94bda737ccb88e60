"""
Scenario definitions: flux, hysteresis width, initial data, grid and
output times, loaded from YAML files or the presets shipped with the
package.

Example scenario file:

    name: rr-right
    flux: burgers
    a: 1.0
    initial:
      kind: riemann
      u_l: 1.0
      w_l: 0.5
      u_r: 3.0
      w_r: 3.0
    domain: [-2.0, 2.0]
    dx: 0.01
    cfl_fraction: 1.0
    output_times: [0.25]
    comparison: none
"""

import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Dict, List, Tuple, Union

import numpy as np
import yaml

from .flux import ConvexFlux, get_flux
from .hysteresis import PlayState
from .riemann import RiemannProblem

logger = logging.getLogger(__name__)

PRESET_PACKAGE = "playfv.presets"

Profile = Callable[[np.ndarray], np.ndarray]


class InitialKind(Enum):
    RIEMANN = "riemann"
    GAUSSIAN = "gaussian"
    PIECEWISE = "piecewise"


class ComparisonMode(Enum):
    NONE = "none"
    NON_HYSTERETIC_PAIR = "non-hysteretic-pair"


@dataclass(frozen=True)
class InitialData:
    """Initial profiles of u and w, described by a kind and its parameters."""
    kind: InitialKind
    params: Dict[str, Any]

    def __post_init__(self):
        required = {
            InitialKind.RIEMANN: ("u_l", "w_l", "u_r", "w_r"),
            InitialKind.GAUSSIAN: ("amplitude",),
            InitialKind.PIECEWISE: ("breaks", "u", "w"),
        }[self.kind]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind.value} initial data is missing {', '.join(missing)}")
        if self.kind is InitialKind.PIECEWISE:
            n = len(self.params["breaks"])
            if len(self.params["u"]) != n + 1 or len(self.params["w"]) != n + 1:
                raise ValueError(
                    f"piecewise data with {n} breaks needs {n + 1} values of u and of w"
                )
            if list(self.params["breaks"]) != sorted(self.params["breaks"]):
                raise ValueError("piecewise breaks must be sorted")

    @classmethod
    def riemann(cls, left: PlayState, right: PlayState, x0: float = 0.0) -> "InitialData":
        return cls(InitialKind.RIEMANN, {
            "u_l": left.u, "w_l": left.w, "u_r": right.u, "w_r": right.w, "x0": x0,
        })

    def profiles(self) -> Tuple[Profile, Profile]:
        """Vectorized callables (u0, w0)."""
        p = self.params
        if self.kind is InitialKind.RIEMANN:
            x0 = float(p.get("x0", 0.0))
            u_l, u_r = float(p["u_l"]), float(p["u_r"])
            w_l, w_r = float(p["w_l"]), float(p["w_r"])
            return (
                lambda x: np.where(x < x0, u_l, u_r),
                lambda x: np.where(x < x0, w_l, w_r),
            )
        if self.kind is InitialKind.GAUSSIAN:
            amp = float(p["amplitude"])
            w_amp = float(p.get("w_amplitude", amp))
            center = float(p.get("center", 0.0))
            width = float(p.get("width", 1.0))

            def bump(x):
                return np.exp(-((x - center) ** 2) / (2.0 * width ** 2))

            return (lambda x: amp * bump(x), lambda x: w_amp * bump(x))

        breaks = np.asarray(p["breaks"], dtype=float)
        u_vals = np.asarray(p["u"], dtype=float)
        w_vals = np.asarray(p["w"], dtype=float)
        return (
            lambda x: u_vals[np.searchsorted(breaks, x, side="right")],
            lambda x: w_vals[np.searchsorted(breaks, x, side="right")],
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, **self.params}


@dataclass
class Scenario:
    """A complete run description."""
    name: str
    flux: str
    a: float
    initial: InitialData
    domain: Tuple[float, float]
    dx: float
    output_times: List[float]
    cfl_fraction: float = 1.0
    comparison: ComparisonMode = ComparisonMode.NONE
    boundary_check: bool = True
    description: str = ""

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"Scenario '{self.name}': a must be positive, got {self.a}")
        if not self.dx > 0:
            raise ValueError(f"Scenario '{self.name}': dx must be positive, got {self.dx}")
        if not self.domain[1] > self.domain[0]:
            raise ValueError(f"Scenario '{self.name}': empty domain {list(self.domain)}")
        if not 0 < self.cfl_fraction <= 1:
            raise ValueError(
                f"Scenario '{self.name}': cfl_fraction must lie in (0, 1], got {self.cfl_fraction}"
            )
        if not self.output_times:
            raise ValueError(f"Scenario '{self.name}': no output times")
        if any(t <= 0 for t in self.output_times):
            raise ValueError(f"Scenario '{self.name}': output times must be positive")
        if list(self.output_times) != sorted(self.output_times):
            raise ValueError(f"Scenario '{self.name}': output times must be increasing")
        get_flux(self.flux)

    @property
    def t_end(self) -> float:
        return self.output_times[-1]

    @property
    def flux_obj(self) -> ConvexFlux:
        return get_flux(self.flux)

    @property
    def is_riemann(self) -> bool:
        return self.initial.kind is InitialKind.RIEMANN

    def riemann_problem(self) -> RiemannProblem:
        """The Riemann problem of a riemann-kind scenario."""
        if not self.is_riemann:
            raise ValueError(f"Scenario '{self.name}' does not hold Riemann data")
        p = self.initial.params
        return RiemannProblem(
            PlayState(float(p["u_l"]), float(p["w_l"])),
            PlayState(float(p["u_r"]), float(p["w_r"])),
            self.a,
            self.flux_obj,
        )

    def with_dx(self, dx: float) -> "Scenario":
        """Copy on a different grid."""
        data = self.to_dict()
        data["dx"] = dx
        return scenario_from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "flux": self.flux,
            "a": self.a,
            "initial": self.initial.to_dict(),
            "domain": list(self.domain),
            "dx": self.dx,
            "cfl_fraction": self.cfl_fraction,
            "output_times": list(self.output_times),
            "comparison": self.comparison.value,
            "boundary_check": self.boundary_check,
        }


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """Build a Scenario from parsed YAML."""
    if not isinstance(data, dict):
        raise ValueError("Scenario must be a mapping")
    missing = [k for k in ("name", "flux", "a", "initial", "domain", "dx", "output_times")
               if k not in data]
    if missing:
        raise ValueError(f"Scenario is missing {', '.join(missing)}")

    initial = dict(data["initial"])
    kind_name = initial.pop("kind", None)
    try:
        kind = InitialKind(kind_name)
    except ValueError:
        raise ValueError(
            f"Unknown initial kind '{kind_name}'. Options: "
            f"{', '.join(k.value for k in InitialKind)}"
        ) from None

    comparison_name = data.get("comparison", "none") or "none"
    try:
        comparison = ComparisonMode(comparison_name)
    except ValueError:
        raise ValueError(
            f"Unknown comparison '{comparison_name}'. Options: "
            f"{', '.join(m.value for m in ComparisonMode)}"
        ) from None

    domain = data["domain"]
    if len(domain) != 2:
        raise ValueError(f"domain must be [x_min, x_max], got {domain}")
    times = data["output_times"]
    if not isinstance(times, (list, tuple)):
        times = [times]

    return Scenario(
        name=str(data["name"]),
        flux=str(data["flux"]),
        a=float(data["a"]),
        initial=InitialData(kind, initial),
        domain=(float(domain[0]), float(domain[1])),
        dx=float(data["dx"]),
        output_times=[float(t) for t in times],
        cfl_fraction=float(data.get("cfl_fraction", 1.0)),
        comparison=comparison,
        boundary_check=bool(data.get("boundary_check", True)),
        description=str(data.get("description", "")),
    )


def load_scenario(source: Union[str, Path]) -> Scenario:
    """
    Load a scenario from a YAML file, or a preset when source names one.

    Raises:
        ValueError: If the file is malformed or the name is unknown
    """
    path = Path(source)
    if not path.exists():
        if str(source) in list_presets():
            return get_preset(str(source))
        raise ValueError(f"No scenario file or preset named '{source}'")
    with open(path) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ValueError(f"Malformed scenario file {path}: {e}") from e
    logger.debug(f"Loaded scenario from {path}")
    return scenario_from_dict(data)


def list_presets() -> List[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(PRESET_PACKAGE)
    return sorted(
        entry.name[: -len(".yaml")] for entry in root.iterdir() if entry.name.endswith(".yaml")
    )


def get_preset(name: str) -> Scenario:
    """Load a shipped preset by name."""
    entry = resources.files(PRESET_PACKAGE).joinpath(f"{name}.yaml")
    if not entry.is_file():
        raise ValueError(f"Unknown preset '{name}'. Available: {', '.join(list_presets())}")
    return scenario_from_dict(yaml.safe_load(entry.read_text()))
