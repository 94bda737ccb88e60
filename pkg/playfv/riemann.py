"""
Exact Riemann solver for the conservation law with Play hysteresis.

Solves the problem with piecewise constant data (u_l, w_l) | (u_r, w_r)
and returns its self-similar wave fan: rarefactions with w either frozen
or coupled to the strip boundary, u-only / coupled / fast / stationary
shocks, and stationary contacts in w at x = 0. Also provides sampling of
the fan, the Rankine-Hugoniot speed and the shock admissibility
classifier.

Usage:
    from playfv.flux import get_flux
    from playfv.hysteresis import PlayState
    from playfv.riemann import RiemannProblem, solve, sample

    problem = RiemannProblem(PlayState(1.0, 0.5), PlayState(3.0, 3.0), 1.0, get_flux("burgers"))
    fan = solve(problem)
    state = sample(fan, 2.5)   # PlayState(u=2.5, w=3.0)
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from scipy.optimize import bisect

from .flux import (
    ConvexFlux,
    argmin_on,
    chord_slope,
    fast_shock_left,
    fast_shock_right,
    nearly_equal,
    speeds_left,
    speeds_right,
)
from .hysteresis import PlayConfig, PlayState, play_project

logger = logging.getLogger(__name__)

# Contacts in w narrower than this are not emitted
CONTACT_TOLERANCE = 1e-12

# Tolerance for the admissibility classifier
ADMISSIBILITY_TOLERANCE = 1e-10


class WMode(Enum):
    """How w behaves inside a rarefaction."""
    FROZEN = "frozen"                # w constant
    COUPLED_PLUS = "w=u+a"           # pair on the boundary u = w - a
    COUPLED_MINUS = "w=u-a"          # pair on the boundary u = w + a


class ShockKind(Enum):
    """Shock families produced by the solver."""
    U_ONLY = "u-only"            # w continuous across the shock
    COUPLED = "coupled"          # both sides on the same strip boundary
    FAST = "fast"                # single jump replacing the two-shock structure
    STATIONARY = "stationary"    # f(u-) = f(u+), zero speed


@dataclass(frozen=True)
class Rarefaction:
    """Centred rarefaction in u; w frozen at w_value or coupled to u."""
    u_from: float
    u_to: float
    w_mode: WMode
    speed_from: float
    speed_to: float
    a: float
    w_value: Optional[float] = None

    def w_at(self, u: float) -> float:
        if self.w_mode is WMode.FROZEN:
            return self.w_value
        if self.w_mode is WMode.COUPLED_PLUS:
            return u + self.a
        return u - self.a

    @property
    def left(self) -> PlayState:
        return PlayState(self.u_from, self.w_at(self.u_from))

    @property
    def right(self) -> PlayState:
        return PlayState(self.u_to, self.w_at(self.u_to))

    @property
    def speed_min(self) -> float:
        return self.speed_from

    @property
    def speed_max(self) -> float:
        return self.speed_to

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "rarefaction",
            "u_from": self.u_from,
            "u_to": self.u_to,
            "w_mode": self.w_mode.value,
            "w_value": self.w_value,
            "speeds": [self.speed_from, self.speed_to],
        }


@dataclass(frozen=True)
class Shock:
    """Discontinuity between two states travelling at sigma."""
    left: PlayState
    right: PlayState
    sigma: float
    kind: ShockKind

    @property
    def speed_min(self) -> float:
        return self.sigma

    @property
    def speed_max(self) -> float:
        return self.sigma

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "shock",
            "kind": self.kind.value,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "sigma": self.sigma,
        }


@dataclass(frozen=True)
class StationaryWContact:
    """Jump in w at x = 0 with u continuous."""
    u: float
    w_left: float
    w_right: float

    @property
    def left(self) -> PlayState:
        return PlayState(self.u, self.w_left)

    @property
    def right(self) -> PlayState:
        return PlayState(self.u, self.w_right)

    @property
    def speed_min(self) -> float:
        return 0.0

    @property
    def speed_max(self) -> float:
        return 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "contact",
            "u": self.u,
            "w_left": self.w_left,
            "w_right": self.w_right,
            "speed": 0.0,
        }


Wave = Union[Rarefaction, Shock, StationaryWContact]


@dataclass(frozen=True)
class RiemannProblem:
    """Piecewise constant data on either side of x = 0."""
    left: PlayState
    right: PlayState
    a: float
    flux: ConvexFlux

    def __post_init__(self):
        PlayConfig(self.a)
        for side, state in (("left", self.left), ("right", self.right)):
            if not state.in_strip(self.a):
                raise ValueError(
                    f"{side} state (u={state.u}, w={state.w}) violates |u - w| <= a={self.a}"
                )


@dataclass(frozen=True)
class WaveFan:
    """Ordered waves of a Riemann solution, left to right."""
    waves: Tuple[Wave, ...]
    left_state: PlayState
    right_state: PlayState
    flux: ConvexFlux = field(repr=False)
    a: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "left_state": self.left_state.to_dict(),
            "right_state": self.right_state.to_dict(),
            "a": self.a,
            "flux": self.flux.name,
            "waves": [wave.to_dict() for wave in self.waves],
        }


# =============================================================================
# RANKINE-HUGONIOT
# =============================================================================

def rh_speed(left: PlayState, right: PlayState, f: ConvexFlux) -> Optional[float]:
    """
    Speed from f(u-) - f(u+) = sigma (u- - u+ + w- - w+).

    Returns None when the bracket vanishes; such a jump can only be
    admissible as a stationary one with f(u-) = f(u+).
    """
    denominator = (left.u - right.u) + (left.w - right.w)
    if denominator == 0:
        return None
    return float((f(left.u) - f(right.u)) / denominator)


# =============================================================================
# SOLVER
# =============================================================================

def _rarefaction(
    f: ConvexFlux, a: float, u_from: float, u_to: float, mode: WMode,
    w_value: Optional[float] = None,
) -> Optional[Rarefaction]:
    if u_to <= u_from:
        return None
    factor = 1.0 if mode is WMode.FROZEN else 0.5
    return Rarefaction(
        u_from=u_from,
        u_to=u_to,
        w_mode=mode,
        speed_from=factor * float(f.deriv(u_from)),
        speed_to=factor * float(f.deriv(u_to)),
        a=a,
        w_value=w_value,
    )


def _solve_rarefactions(p: RiemannProblem) -> List[Wave]:
    """u_l < u_r: two half-problems split at the minimizer of f."""
    f, a = p.flux, p.a
    u_l, w_l = p.left.u, p.left.w
    u_r, w_r = p.right.u, p.right.w
    cfg = PlayConfig(a)
    u_star = float(argmin_on(f, u_l, u_r))

    waves: List[Wave] = []

    # Left half: Hat(w_l), w frozen up to w_l + a, then w = u - a
    split = min(max(w_l + a, u_l), u_star)
    for wave in (
        _rarefaction(f, a, u_l, split, WMode.FROZEN, w_l),
        _rarefaction(f, a, split, u_star, WMode.COUPLED_MINUS),
    ):
        if wave is not None:
            waves.append(wave)

    w_minus = play_project(w_l, u_star, cfg)
    w_plus = play_project(w_r, u_star, cfg)
    if abs(w_minus - w_plus) > CONTACT_TOLERANCE:
        waves.append(StationaryWContact(u_star, w_minus, w_plus))

    # Right half: Bar(w_r), w = u + a below w_r - a, then frozen
    split = max(min(w_r - a, u_r), u_star)
    for wave in (
        _rarefaction(f, a, u_star, split, WMode.COUPLED_PLUS),
        _rarefaction(f, a, split, u_r, WMode.FROZEN, w_r),
    ):
        if wave is not None:
            waves.append(wave)
    return waves


def _solve_right_moving(p: RiemannProblem) -> List[Wave]:
    """u_l > u_r with f(u_l) > f(u_r): waves travel right of x = 0."""
    f, a = p.flux, p.a
    u_l, w_l = p.left.u, p.left.w
    u_r, w_r = p.right.u, p.right.w
    edge = w_r + a
    right = PlayState(u_r, w_r)

    if u_l <= edge or nearly_equal(u_l, edge):
        w_post = w_r
        sigma = float((f(u_l) - f(u_r)) / (u_l - u_r))
        shocks = [Shock(PlayState(u_l, w_post), right, sigma, ShockKind.U_ONLY)]
    elif nearly_equal(u_r, edge):
        w_post = u_l - a
        sigma = float((f(u_l) - f(u_r)) / (2.0 * (u_l - u_r)))
        shocks = [Shock(PlayState(u_l, w_post), right, sigma, ShockKind.COUPLED)]
    else:
        w_post = u_l - a
        speeds = speeds_right(f, u_l, u_r, w_r, a)
        if fast_shock_right(f, u_l, u_r, w_r, a):
            shocks = [Shock(PlayState(u_l, w_post), right, speeds.mu, ShockKind.FAST)]
        else:
            middle = PlayState(edge, w_r)
            shocks = [
                Shock(PlayState(u_l, w_post), middle, speeds.mu_l, ShockKind.COUPLED),
                Shock(middle, right, speeds.mu_r, ShockKind.U_ONLY),
            ]

    waves: List[Wave] = []
    if abs(w_l - w_post) > CONTACT_TOLERANCE:
        waves.append(StationaryWContact(u_l, w_l, w_post))
    waves.extend(shocks)
    return waves


def _solve_left_moving(p: RiemannProblem) -> List[Wave]:
    """u_l > u_r with f(u_l) < f(u_r): mirror of the right-moving case."""
    f, a = p.flux, p.a
    u_l, w_l = p.left.u, p.left.w
    u_r, w_r = p.right.u, p.right.w
    edge = w_l - a
    left = PlayState(u_l, w_l)

    if u_r >= edge or nearly_equal(u_r, edge):
        w_pre = w_l
        sigma = float((f(u_l) - f(u_r)) / (u_l - u_r))
        waves: List[Wave] = [Shock(left, PlayState(u_r, w_pre), sigma, ShockKind.U_ONLY)]
    elif nearly_equal(u_l, edge):
        w_pre = u_r + a
        sigma = float((f(u_l) - f(u_r)) / (2.0 * (u_l - u_r)))
        waves = [Shock(left, PlayState(u_r, w_pre), sigma, ShockKind.COUPLED)]
    else:
        w_pre = u_r + a
        speeds = speeds_left(f, u_l, u_r, w_l, a)
        if fast_shock_left(f, u_l, u_r, w_l, a):
            waves = [Shock(left, PlayState(u_r, w_pre), speeds.nu, ShockKind.FAST)]
        else:
            middle = PlayState(edge, w_l)
            waves = [
                Shock(left, middle, speeds.nu_l, ShockKind.U_ONLY),
                Shock(middle, PlayState(u_r, w_pre), speeds.nu_r, ShockKind.COUPLED),
            ]

    if abs(w_pre - w_r) > CONTACT_TOLERANCE:
        waves.append(StationaryWContact(u_r, w_pre, w_r))
    return waves


def solve(p: RiemannProblem) -> WaveFan:
    """
    Solve a Riemann problem exactly.

    Dispatch:
        u_l = u_r: at most a stationary contact in w.
        u_l < u_r: rarefactions split at the minimizer of f, glued by a
            contact at x = 0 when the two w-limits differ.
        u_l > u_r, f(u_l) = f(u_r): one stationary shock.
        u_l > u_r, f(u_l) > f(u_r): right-moving u-only, coupled, two-shock
            or fast-shock structure, preceded by a contact at x = 0.
        u_l > u_r, f(u_l) < f(u_r): the left-moving mirror.
    """
    f = p.flux
    u_l, u_r = p.left.u, p.right.u

    if nearly_equal(u_l, u_r):
        waves: List[Wave] = []
        if abs(p.left.w - p.right.w) > CONTACT_TOLERANCE:
            waves.append(StationaryWContact(u_l, p.left.w, p.right.w))
        case = "contact"
    elif u_l < u_r:
        waves = _solve_rarefactions(p)
        case = "rarefaction"
    elif nearly_equal(f(u_l), f(u_r)):
        waves = [Shock(p.left, p.right, 0.0, ShockKind.STATIONARY)]
        case = "stationary"
    elif f(u_l) > f(u_r):
        waves = _solve_right_moving(p)
        case = "right-moving"
    else:
        waves = _solve_left_moving(p)
        case = "left-moving"

    logger.debug(
        f"Riemann ({u_l}, {p.left.w}) | ({u_r}, {p.right.w}): {case}, {len(waves)} wave(s)"
    )
    return WaveFan(tuple(waves), p.left, p.right, f, p.a)


# =============================================================================
# SAMPLING
# =============================================================================

def _invert_rarefaction(fan: WaveFan, wave: Rarefaction, xi: float) -> float:
    factor = 1.0 if wave.w_mode is WMode.FROZEN else 0.5
    f = fan.flux

    def residual(u: float) -> float:
        return factor * float(f.deriv(u)) - xi

    return bisect(residual, wave.u_from, wave.u_to, xtol=1e-14, maxiter=200)


def sample(fan: WaveFan, xi: float, side: str = "right") -> PlayState:
    """
    State of the fan at similarity coordinate xi = x / t.

    At a wave's exact speed the right limit is returned; side="left" gives
    the left limit instead.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    state = fan.left_state
    for wave in fan.waves:
        before = xi <= wave.speed_min if side == "left" else xi < wave.speed_min
        if before:
            return state
        if isinstance(wave, Rarefaction) and xi < wave.speed_max:
            u = _invert_rarefaction(fan, wave, xi)
            return PlayState(u, wave.w_at(u))
        state = wave.right
    return fan.right_state if fan.waves else state


def trace(fan: WaveFan, side: str) -> PlayState:
    """Trace of the fan at x = 0 from the given side."""
    return sample(fan, 0.0, side=side)


def wave_speeds(fan: WaveFan) -> List[float]:
    """Flattened speed list (both endpoints of rarefactions), left to right."""
    speeds: List[float] = []
    for wave in fan.waves:
        speeds.append(wave.speed_min)
        if isinstance(wave, Rarefaction):
            speeds.append(wave.speed_max)
    return speeds


# =============================================================================
# ADMISSIBILITY
# =============================================================================

class AdmissibilityCase(Enum):
    """Which entropy-admissible shock configuration applies."""
    W_CONTINUOUS = "i"          # w- = w+
    STATIONARY = "ii"           # f(u-) = f(u+), sigma = 0
    COUPLED_LOWER = "iii"       # both states on w = u - a, f(u-) > f(u+)
    FAST_LOWER = "iv"           # w- = u- - a, mu_+ <= mu_-
    COUPLED_UPPER = "v"         # both states on w = u + a, f(u-) < f(u+)
    FAST_UPPER = "vi"           # w+ = u+ + a, nu_+ <= nu_-


def admissible(
    left: PlayState,
    right: PlayState,
    sigma: float,
    f: ConvexFlux,
    a: float,
) -> Tuple[bool, Optional[AdmissibilityCase]]:
    """
    Entropy admissibility of a single discontinuity.

    A jump is admissible iff sigma satisfies the Rankine-Hugoniot relation,
    u- >= u+, and one of the six configurations in AdmissibilityCase holds.

    Returns:
        (admissible, case) with case None when inadmissible
    """
    tol = ADMISSIBILITY_TOLERANCE

    def eq(x: float, y: float) -> bool:
        return bool(nearly_equal(x, y, tol))

    def gt(x: float, y: float) -> bool:
        return x > y and not eq(x, y)

    u_m, w_m, u_p, w_p = left.u, left.w, right.u, right.w
    f_m, f_p = float(f(u_m)), float(f(u_p))

    jump = f_m - f_p - sigma * ((u_m - u_p) + (w_m - w_p))
    scale = max(1.0, abs(f_m), abs(f_p), abs(sigma) * (abs(u_m - u_p) + abs(w_m - w_p)))
    if abs(jump) > tol * scale:
        return False, None
    if gt(u_p, u_m):
        return False, None

    if eq(w_m, w_p):
        return True, AdmissibilityCase.W_CONTINUOUS
    if eq(f_m, f_p) and eq(sigma, 0.0):
        return True, AdmissibilityCase.STATIONARY
    if not gt(w_m, w_p):
        return False, None

    if gt(f_m, f_p) and eq(w_m, u_m - a):
        if eq(w_p, u_p - a):
            return True, AdmissibilityCase.COUPLED_LOWER
        edge = w_p + a
        mu_plus = float(chord_slope(f, u_p, edge))
        mu_minus = 0.5 * float(chord_slope(f, edge, u_m))
        if mu_plus <= mu_minus + tol * max(1.0, abs(mu_plus), abs(mu_minus)):
            return True, AdmissibilityCase.FAST_LOWER
        return False, None

    if gt(f_p, f_m) and eq(w_p, u_p + a):
        if eq(w_m, u_m + a):
            return True, AdmissibilityCase.COUPLED_UPPER
        edge = w_m - a
        nu_minus = float(chord_slope(f, edge, u_m))
        nu_plus = 0.5 * float(chord_slope(f, u_p, edge))
        if nu_plus <= nu_minus + tol * max(1.0, abs(nu_plus), abs(nu_minus)):
            return True, AdmissibilityCase.FAST_UPPER
        return False, None

    return False, None
