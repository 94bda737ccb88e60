"""
Convex fluxes and the hysteresis-modified fluxes built on them.

Provides the ConvexFlux abstraction with a registry of named fluxes, the
three modified fluxes (Bar, Hat, Tilde) that govern u when w is frozen or
coupled to the strip boundary, the Godunov two-point flux, the shock speeds
of the two-branch envelope construction, and the entropy potential G.

All flux evaluations broadcast over numpy arrays; scalar inputs give
float results.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect

logger = logging.getLogger(__name__)

# Relative tolerance for equality tests in the case dispatch
DISPATCH_TOLERANCE = 1e-12

# Relative tolerance for quadrature of the entropy potential
QUAD_TOLERANCE = 1e-10


def _out(value):
    """Return a float for 0-d results, the array otherwise."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr


def exceeds(x, y, tol: float = DISPATCH_TOLERANCE):
    """Elementwise x > y beyond a relative tolerance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    return x - y > tol * scale


def nearly_equal(x, y, tol: float = DISPATCH_TOLERANCE):
    """Elementwise |x - y| <= tol * max(1, |x|, |y|)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    result = np.abs(x - y) <= tol * scale
    return bool(result) if result.ndim == 0 else result


class ConvexFlux:
    """
    A C2 convex flux f with its derivative.

    Args:
        name: Identifier used in reports and the registry
        func: f, must accept numpy arrays
        deriv: f', must accept numpy arrays
        minimizer: Global minimizer of f if known (-inf for increasing f,
            +inf for decreasing f); None means bisection on f'
        antiderivative: Primitive of f if known, used for G in closed form
    """

    def __init__(
        self,
        name: str,
        func: Callable,
        deriv: Callable,
        minimizer: Optional[float] = None,
        antiderivative: Optional[Callable] = None,
    ):
        self.name = name
        self._func = func
        self._deriv = deriv
        self.minimizer = minimizer
        self.antiderivative = antiderivative

    def __call__(self, u):
        return _out(self._func(np.asarray(u, dtype=float)))

    def eval(self, u):
        """Evaluate f(u)."""
        return self(u)

    def deriv(self, u):
        """Evaluate f'(u)."""
        u = np.asarray(u, dtype=float)
        return _out(np.broadcast_to(self._deriv(u), u.shape))

    def scaled(self, factor: float) -> "ConvexFlux":
        """Return factor * f as a new flux (factor > 0)."""
        if not factor > 0:
            raise ValueError(f"Flux scale factor must be positive, got {factor}")
        primitive = self.antiderivative
        return ConvexFlux(
            name=f"{self.name}*{factor:g}",
            func=lambda u: factor * self._func(u),
            deriv=lambda u: factor * self._deriv(u),
            minimizer=self.minimizer,
            antiderivative=(lambda u: factor * primitive(u)) if primitive else None,
        )

    def check_convexity(self, lo: float, hi: float, samples: int = 1000, seed: int = 0) -> bool:
        """Sample triples x < y < z in [lo, hi] and test the chord inequality."""
        rng = np.random.default_rng(seed)
        pts = np.sort(rng.uniform(lo, hi, size=(samples, 3)), axis=1)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        keep = z > x
        x, y, z = x[keep], y[keep], z[keep]
        fx, fy, fz = self(x), self(y), self(z)
        scale = max(1.0, float(np.max(np.abs([fx, fy, fz]))))
        chord = ((z - y) * fx + (y - x) * fz) / (z - x)
        return bool(np.all(fy <= chord + 1e-10 * scale))

    def check_derivative(self, lo: float, hi: float, samples: int = 200, h: float = 1e-5) -> bool:
        """Compare f' against central differences on a uniform sample."""
        x = np.linspace(lo, hi, samples)
        fd = (self(x + h) - self(x - h)) / (2 * h)
        scale = np.maximum(1.0, np.abs(self.deriv(x)))
        return bool(np.all(np.abs(self.deriv(x) - fd) <= 1e-5 * scale))

    def __repr__(self) -> str:
        return f"ConvexFlux({self.name!r})"


# =============================================================================
# BUILT-IN FLUXES
# =============================================================================

def _burgers(u):
    return 0.5 * u * u


def _burgers_deriv(u):
    return u


def _burgers_primitive(u):
    return u ** 3 / 6.0


def _quartic(u):
    return 0.25 * u ** 4


def _quartic_deriv(u):
    return u ** 3


def _quartic_primitive(u):
    return u ** 5 / 20.0


def _quartic_shifted(u):
    return 0.25 * u ** 4 + u


def _quartic_shifted_deriv(u):
    return u ** 3 + 1.0


def _quartic_shifted_primitive(u):
    return u ** 5 / 20.0 + 0.5 * u * u


def _linear(u):
    return u


def _linear_deriv(u):
    return np.ones_like(u)


def _linear_primitive(u):
    return 0.5 * u * u


_REGISTRY: Dict[str, ConvexFlux] = {
    "burgers": ConvexFlux("burgers", _burgers, _burgers_deriv, 0.0, _burgers_primitive),
    "quartic": ConvexFlux("quartic", _quartic, _quartic_deriv, 0.0, _quartic_primitive),
    "quartic-shifted": ConvexFlux(
        "quartic-shifted", _quartic_shifted, _quartic_shifted_deriv, -1.0,
        _quartic_shifted_primitive,
    ),
    "linear": ConvexFlux("linear", _linear, _linear_deriv, -np.inf, _linear_primitive),
}


def get_flux(name: str) -> ConvexFlux:
    """Look up a registered flux by id."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"Unknown flux '{name}'. Available: {', '.join(sorted(_REGISTRY))}"
        ) from None


def register_flux(name: str, flux: ConvexFlux, replace: bool = False) -> None:
    """Register a user flux under a string id."""
    if name in _REGISTRY and not replace:
        raise ValueError(f"Flux '{name}' is already registered")
    _REGISTRY[name] = flux
    logger.debug(f"Registered flux {name}")


def available_fluxes() -> List[str]:
    return sorted(_REGISTRY)


# =============================================================================
# ELEMENTARY QUANTITIES
# =============================================================================

def lipschitz_on(f: ConvexFlux, lo: float, hi: float) -> float:
    """
    Lipschitz constant of f on [lo, hi].

    f' is monotone for convex f, so the maximum of |f'| sits at an endpoint.
    """
    if lo > hi:
        raise ValueError(f"Empty interval: lo={lo} > hi={hi}")
    return float(max(abs(f.deriv(lo)), abs(f.deriv(hi))))


def _argmin_scalar(f: ConvexFlux, lo: float, hi: float) -> float:
    if f.deriv(lo) >= 0:
        return lo
    if f.deriv(hi) <= 0:
        return hi
    return bisect(f.deriv, lo, hi, xtol=DISPATCH_TOLERANCE * (hi - lo), maxiter=200)


def argmin_on(f: ConvexFlux, lo, hi):
    """
    Minimizer of f on [lo, hi].

    Uses the flux's known global minimizer when available, clamped into the
    interval; otherwise bisection on f'.
    """
    lo_arr = np.asarray(lo, dtype=float)
    hi_arr = np.asarray(hi, dtype=float)
    if np.any(lo_arr > hi_arr):
        raise ValueError(f"Empty interval: lo={lo} > hi={hi}")
    if f.minimizer is not None:
        return _out(np.clip(f.minimizer, lo_arr, hi_arr))
    if lo_arr.ndim == 0 and hi_arr.ndim == 0:
        return float(_argmin_scalar(f, float(lo_arr), float(hi_arr)))
    return _out(np.vectorize(lambda x, y: _argmin_scalar(f, x, y), otypes=[float])(lo_arr, hi_arr))


def godunov_two_point(f: ConvexFlux, u_l, u_r):
    """
    Godunov flux: min of f over [u_l, u_r] when u_l <= u_r, max over
    [u_r, u_l] otherwise.
    """
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    lo = np.minimum(u_l, u_r)
    hi = np.maximum(u_l, u_r)
    low_value = f(argmin_on(f, lo, hi))
    high_value = np.maximum(f(u_l), f(u_r))
    return _out(np.where(u_l <= u_r, low_value, high_value))


def chord_slope(f: ConvexFlux, x, y):
    """(f(y) - f(x)) / (y - x), with f'(x) where the interval collapses."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    collapsed = d == 0
    safe = np.where(collapsed, 1.0, d)
    return _out(np.where(collapsed, f.deriv(x), (f(y) - f(x)) / safe))


# =============================================================================
# MODIFIED FLUXES
# =============================================================================

class ModifiedFluxKind(Enum):
    """Which branches of the modified flux are active."""
    BAR = "bar"      # coupled branch below w - a only
    HAT = "hat"      # coupled branch above w + a only
    TILDE = "tilde"  # both coupled branches


@dataclass(frozen=True)
class ModifiedFlux:
    """A modified flux anchored at the frozen output value w."""
    kind: ModifiedFluxKind
    w: float

    @classmethod
    def bar(cls, w: float) -> "ModifiedFlux":
        return cls(ModifiedFluxKind.BAR, w)

    @classmethod
    def hat(cls, w: float) -> "ModifiedFlux":
        return cls(ModifiedFluxKind.HAT, w)

    @classmethod
    def tilde(cls, w) -> "ModifiedFlux":
        return cls(ModifiedFluxKind.TILDE, w)


def _tilde_eval(f: ConvexFlux, w, a: float, u):
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    lower = w - a
    upper = w + a
    fu = f(u)
    return np.where(
        u < lower, 0.5 * fu + 0.5 * f(lower),
        np.where(u > upper, 0.5 * fu + 0.5 * f(upper), fu),
    )


def modified_eval(f: ConvexFlux, kind: ModifiedFlux, a: float, u):
    """
    Evaluate a modified flux.

    Below w - a the flux is (f(u) + f(w - a)) / 2, above w + a it is
    (f(u) + f(w + a)) / 2, and f in between; Bar keeps only the lower
    coupled branch and Hat only the upper one. The result is continuous
    at the kinks.
    """
    if not a > 0:
        raise ValueError(f"Hysteresis half-width must be positive, got a={a}")
    u = np.asarray(u, dtype=float)
    w = np.asarray(kind.w, dtype=float)
    fu = f(u)
    if kind.kind is ModifiedFluxKind.TILDE:
        return _out(_tilde_eval(f, w, a, u))
    if kind.kind is ModifiedFluxKind.BAR:
        lower = w - a
        return _out(np.where(u < lower, 0.5 * fu + 0.5 * f(lower), fu))
    upper = w + a
    return _out(np.where(u > upper, 0.5 * fu + 0.5 * f(upper), fu))


def modified_deriv(f: ConvexFlux, kind: ModifiedFlux, a: float, u):
    """Characteristic speed of a modified flux: f' inside, f'/2 on coupled branches."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(kind.w, dtype=float)
    du = f.deriv(u)
    below = u < w - a
    above = u > w + a
    if kind.kind is ModifiedFluxKind.BAR:
        above = np.zeros_like(above)
    elif kind.kind is ModifiedFluxKind.HAT:
        below = np.zeros_like(below)
    return _out(np.where(below | above, 0.5 * du, du))


def modified_godunov(f: ConvexFlux, w, a: float, u_l, u_r):
    """
    Godunov flux of the Tilde flux anchored at w.

    The coupled branches halve f' without changing its sign, so the Tilde
    flux is minimized on [u_l, u_r] wherever f is.
    """
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    lo = np.minimum(u_l, u_r)
    hi = np.maximum(u_l, u_r)
    low_value = _tilde_eval(f, w, a, argmin_on(f, lo, hi))
    high_value = np.maximum(_tilde_eval(f, w, a, u_l), _tilde_eval(f, w, a, u_r))
    return _out(np.where(u_l <= u_r, low_value, high_value))


# =============================================================================
# SHOCK SPEEDS
# =============================================================================

@dataclass(frozen=True)
class ShockSpeeds:
    """
    Speeds of the elementary and fast shocks of one family.

    speeds_right fills mu_r, mu_l, mu, I_r, I_l; speeds_left fills
    nu_l, nu_r, nu, J_l, J_r. The other family stays None.
    """
    mu_r: Optional[float] = None
    mu_l: Optional[float] = None
    mu: Optional[float] = None
    nu_l: Optional[float] = None
    nu_r: Optional[float] = None
    nu: Optional[float] = None
    I_r: Optional[float] = None
    I_l: Optional[float] = None
    J_r: Optional[float] = None
    J_l: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def right_family(f: ConvexFlux, u_l, u_r, w_r, a: float):
    """
    Shock-speed family above the right state, shared by speeds_right and
    the numerical fluxes.

    Returns:
        (mu_r, mu_l, mu, I_r, I_l), vectorized over the inputs
    """
    edge = np.asarray(w_r, dtype=float) + a
    I_r = edge - u_r
    I_l = u_l - edge
    mu_r = chord_slope(f, u_r, edge)
    mu_l = 0.5 * np.asarray(chord_slope(f, edge, u_l))
    weight = I_r + 2.0 * I_l
    safe = np.where(weight == 0, 1.0, weight)
    mu = np.where(weight == 0, mu_r, (I_r * mu_r + 2.0 * I_l * mu_l) / safe)
    return mu_r, mu_l, mu, I_r, I_l


def left_family(f: ConvexFlux, u_l, u_r, w_l, a: float):
    """Mirror of right_family below the left state: (nu_l, nu_r, nu, J_l, J_r)."""
    edge = np.asarray(w_l, dtype=float) - a
    J_l = u_l - edge
    J_r = edge - u_r
    nu_l = chord_slope(f, edge, u_l)
    nu_r = 0.5 * np.asarray(chord_slope(f, u_r, edge))
    weight = J_l + 2.0 * J_r
    safe = np.where(weight == 0, 1.0, weight)
    nu = np.where(weight == 0, nu_l, (J_l * nu_l + 2.0 * J_r * nu_r) / safe)
    return nu_l, nu_r, nu, J_l, J_r


def speeds_right(f: ConvexFlux, u_l: float, u_r: float, w_r: float, a: float) -> ShockSpeeds:
    """
    Speeds for a right-moving shock structure above the right state.

    mu_r is the chord slope of f over [u_r, w_r + a] (f'(u_r) when the
    interval collapses), mu_l half the chord slope over [w_r + a, u_l],
    and mu their I-weighted average, the Rankine-Hugoniot speed of a
    single fast shock.

    Raises:
        ValueError: Unless u_l > u_r and u_r <= w_r + a <= u_l
    """
    edge = w_r + a
    if not (u_l > u_r and not exceeds(u_r, edge) and not exceeds(edge, u_l)):
        raise ValueError(
            f"speeds_right needs u_l > u_r and u_r <= w_r + a <= u_l; "
            f"got u_l={u_l}, u_r={u_r}, w_r + a={edge}"
        )
    mu_r, mu_l, mu, I_r, I_l = right_family(f, u_l, u_r, w_r, a)
    return ShockSpeeds(
        mu_r=float(mu_r), mu_l=float(mu_l), mu=float(mu),
        I_r=float(max(I_r, 0.0)), I_l=float(max(I_l, 0.0)),
    )


def speeds_left(f: ConvexFlux, u_l: float, u_r: float, w_l: float, a: float) -> ShockSpeeds:
    """
    Mirror of speeds_right for a left-moving structure below the left state.

    Raises:
        ValueError: Unless u_l > u_r and u_r <= w_l - a <= u_l
    """
    edge = w_l - a
    if not (u_l > u_r and not exceeds(u_r, edge) and not exceeds(edge, u_l)):
        raise ValueError(
            f"speeds_left needs u_l > u_r and u_r <= w_l - a <= u_l; "
            f"got u_l={u_l}, u_r={u_r}, w_l - a={edge}"
        )
    nu_l, nu_r, nu, J_l, J_r = left_family(f, u_l, u_r, w_l, a)
    return ShockSpeeds(
        nu_l=float(nu_l), nu_r=float(nu_r), nu=float(nu),
        J_l=float(max(J_l, 0.0)), J_r=float(max(J_r, 0.0)),
    )


def fast_shock_right(f: ConvexFlux, u_l, u_r, w_r, a: float):
    """
    Whether the data (u_l | u_r, w_r) is joined by one right-moving fast shock.

    True when u_r < w_r + a < u_l, f(u_l) > f(u_r) and mu_r < mu_l. Ties
    mu_r = mu_l go to the two-shock construction, which coincides with the
    fast shock there. Shared by the Riemann solver and the numerical fluxes.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        mu_r, mu_l, _, _, _ = right_family(f, u_l, u_r, w_r, a)
        edge = np.asarray(w_r, dtype=float) + a
        result = (
            exceeds(u_l, edge) & exceeds(edge, u_r)
            & exceeds(f(u_l), f(u_r)) & exceeds(mu_l, mu_r)
        )
    return bool(result) if np.ndim(result) == 0 else result


def fast_shock_left(f: ConvexFlux, u_l, u_r, w_l, a: float):
    """Mirror of fast_shock_right: u_r < w_l - a < u_l, f(u_l) < f(u_r), nu_l > nu_r."""
    with np.errstate(divide="ignore", invalid="ignore"):
        nu_l, nu_r, _, _, _ = left_family(f, u_l, u_r, w_l, a)
        edge = np.asarray(w_l, dtype=float) - a
        result = (
            exceeds(u_l, edge) & exceeds(edge, u_r)
            & exceeds(f(u_r), f(u_l)) & exceeds(nu_l, nu_r)
        )
    return bool(result) if np.ndim(result) == 0 else result


# =============================================================================
# ENTROPY POTENTIAL
# =============================================================================

def _potential_scalar(f: ConvexFlux, u: float) -> float:
    integral, _ = quad(lambda x: float(f(x)), 0.0, u, epsrel=QUAD_TOLERANCE, epsabs=0.0)
    return u * float(f(u)) - integral


def entropy_potential_G(f: ConvexFlux, u):
    """
    Energy flux G(u) = u f(u) - int_0^u f, so that G'(u) = u f'(u).

    Closed form when the flux supplies an antiderivative, adaptive
    quadrature otherwise.
    """
    u = np.asarray(u, dtype=float)
    if f.antiderivative is not None:
        return _out(u * f(u) - (f.antiderivative(u) - f.antiderivative(np.zeros_like(u))))
    if u.ndim == 0:
        return _potential_scalar(f, float(u))
    return _out(np.vectorize(lambda x: _potential_scalar(f, x), otypes=[float])(u))
