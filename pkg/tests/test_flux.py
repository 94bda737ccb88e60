"""Tests for convex fluxes, modified fluxes and shock speeds."""

import numpy as np
import pytest

from playfv import flux as flux_module
from playfv.flux import (
    ConvexFlux,
    ModifiedFlux,
    argmin_on,
    available_fluxes,
    chord_slope,
    entropy_potential_G,
    exceeds,
    fast_shock_left,
    fast_shock_right,
    get_flux,
    godunov_two_point,
    left_family,
    lipschitz_on,
    modified_deriv,
    modified_eval,
    modified_godunov,
    register_flux,
    right_family,
    speeds_left,
    speeds_right,
)
from playfv.hysteresis import PlayState
from playfv.riemann import RiemannProblem, solve, trace
from playfv.scheme import h1_minus, h1_plus, h2_minus, h2_plus

A = 1.0


@pytest.fixture
def clean_registry():
    """Restore the flux registry after a test registers fluxes."""
    saved = dict(flux_module._REGISTRY)
    yield
    flux_module._REGISTRY.clear()
    flux_module._REGISTRY.update(saved)


class TestRegistry:
    """Tests for the named flux registry."""

    def test_builtins(self):
        """Shipped fluxes are listed in sorted order."""
        assert available_fluxes() == ["burgers", "linear", "quartic", "quartic-shifted"]

    def test_unknown_flux(self):
        """Unknown names list the options."""
        with pytest.raises(ValueError, match="Available: burgers"):
            get_flux("cubic")

    def test_register(self, clean_registry):
        """Registered fluxes are found by name; duplicates need replace=True."""
        flux = get_flux("burgers").scaled(2.0)
        register_flux("steep", flux)
        assert get_flux("steep") is flux
        with pytest.raises(ValueError, match="already registered"):
            register_flux("steep", flux)
        register_flux("steep", get_flux("quartic"), replace=True)
        assert get_flux("steep").name == "quartic"

    @pytest.mark.parametrize("name", ["burgers", "quartic", "quartic-shifted", "linear"])
    def test_builtins_are_convex_with_matching_derivative(self, name):
        """Every builtin passes the convexity and derivative checks."""
        f = get_flux(name)
        assert f.check_convexity(-3.0, 3.0)
        assert f.check_derivative(-3.0, 3.0)

    def test_non_convex_detected(self):
        """A concave flux fails the chord test."""
        concave = ConvexFlux("concave", lambda u: -u * u, lambda u: -2 * u)
        assert not concave.check_convexity(-1.0, 1.0)


class TestElementary:
    """Tests for evaluation, Lipschitz constants and the Godunov flux."""

    def test_scalar_and_array_evaluation(self, burgers):
        """Scalars give floats, arrays give arrays."""
        assert burgers(2.0) == 2.0
        assert isinstance(burgers(2.0), float)
        assert np.array_equal(burgers(np.array([0.0, 2.0])), [0.0, 2.0])
        assert np.array_equal(get_flux("linear").deriv(np.zeros(3)), np.ones(3))

    def test_scaled(self, burgers):
        """Scaling multiplies f, f' and the primitive."""
        half = burgers.scaled(0.5)
        assert half(2.0) == 1.0
        assert half.deriv(2.0) == 1.0
        assert entropy_potential_G(half, 3.0) == pytest.approx(0.5 * 9.0)
        with pytest.raises(ValueError):
            burgers.scaled(0.0)

    def test_lipschitz(self, burgers):
        """max |f'| sits at an endpoint."""
        assert lipschitz_on(burgers, -3.0, 1.0) == 3.0
        assert lipschitz_on(burgers, 0.5, 2.0) == 2.0
        with pytest.raises(ValueError, match="Empty interval"):
            lipschitz_on(burgers, 1.0, 0.0)

    def test_argmin_by_bisection(self):
        """Fluxes without a known minimizer fall back to bisection."""
        f = ConvexFlux("shifted", lambda u: (u - 0.3) ** 2, lambda u: 2 * (u - 0.3))
        assert argmin_on(f, -1.0, 1.0) == pytest.approx(0.3, abs=1e-10)
        assert argmin_on(f, 0.5, 1.0) == 0.5
        assert np.allclose(argmin_on(f, np.array([-1.0, 0.5]), np.array([1.0, 1.0])), [0.3, 0.5])

    @pytest.mark.parametrize("u_l, u_r, expected", [
        (-1.0, 2.0, 0.0),
        (2.0, -1.0, 2.0),
        (-3.0, -1.0, 0.5),
        (3.0, 1.0, 4.5),
    ])
    def test_godunov_two_point(self, burgers, u_l, u_r, expected):
        """min over rising data, max over falling data."""
        assert godunov_two_point(burgers, u_l, u_r) == expected

    def test_chord_slope_collapsed(self, burgers):
        """A collapsed chord gives the derivative."""
        assert chord_slope(burgers, 1.0, 3.0) == 2.0
        assert chord_slope(burgers, 1.5, 1.5) == 1.5

    def test_entropy_potential(self, burgers):
        """G(u) = u^3 / 3 for Burgers; quadrature agrees with the closed form."""
        assert entropy_potential_G(burgers, 3.0) == pytest.approx(9.0)
        no_primitive = ConvexFlux("burgers-quad", lambda u: 0.5 * u * u, lambda u: u)
        u = np.array([-2.0, 0.0, 1.5])
        assert np.allclose(entropy_potential_G(no_primitive, u), u ** 3 / 3, atol=1e-10)


class TestModifiedFlux:
    """Tests for the Bar, Hat and Tilde fluxes."""

    def test_values(self, burgers):
        """Coupled branches average f with its value at the strip edge."""
        assert modified_eval(burgers, ModifiedFlux.tilde(0.0), A, 3.0) == 2.5
        assert modified_eval(burgers, ModifiedFlux.tilde(0.0), A, -3.0) == 2.5
        assert modified_eval(burgers, ModifiedFlux.tilde(0.0), A, 0.5) == 0.125
        assert modified_eval(burgers, ModifiedFlux.bar(0.0), A, 3.0) == 4.5
        assert modified_eval(burgers, ModifiedFlux.bar(0.0), A, -3.0) == 2.5
        assert modified_eval(burgers, ModifiedFlux.hat(0.0), A, -3.0) == 4.5
        assert modified_eval(burgers, ModifiedFlux.hat(0.0), A, 3.0) == 2.5

    def test_continuous_at_kinks(self, burgers):
        """No jump across w - a and w + a."""
        for kind in (ModifiedFlux.bar(0.4), ModifiedFlux.hat(0.4), ModifiedFlux.tilde(0.4)):
            for edge in (-0.6, 1.4):
                lo = modified_eval(burgers, kind, A, edge - 1e-9)
                hi = modified_eval(burgers, kind, A, edge + 1e-9)
                assert lo == pytest.approx(hi, abs=1e-8)

    def test_derivative_halves_on_coupled_branches(self, burgers):
        """f'/2 outside the strip, f' inside."""
        tilde = ModifiedFlux.tilde(0.0)
        assert modified_deriv(burgers, tilde, A, 3.0) == 1.5
        assert modified_deriv(burgers, tilde, A, 0.5) == 0.5
        assert modified_deriv(burgers, ModifiedFlux.bar(0.0), A, 3.0) == 3.0
        assert modified_deriv(burgers, ModifiedFlux.hat(0.0), A, -3.0) == -3.0

    def test_modified_godunov(self, burgers):
        """Godunov flux of Tilde anchored at w."""
        assert modified_godunov(burgers, 3.0, A, 1.0, 3.0) == 1.25
        assert modified_godunov(burgers, 0.0, A, 3.0, -3.0) == 2.5

    def test_rejects_bad_width(self, burgers):
        """a must be positive."""
        with pytest.raises(ValueError):
            modified_eval(burgers, ModifiedFlux.tilde(0.0), 0.0, 1.0)


class TestShockSpeeds:
    """Tests for the elementary and fast shock speeds."""

    def test_speeds_right(self, burgers):
        """Two-shock data: mu_r > mu_l."""
        s = speeds_right(burgers, 1.5, 0.5, 0.0, A)
        assert (s.I_r, s.I_l) == (0.5, 0.5)
        assert s.mu_r == pytest.approx(0.75)
        assert s.mu_l == pytest.approx(0.625)
        assert s.mu == pytest.approx(2.0 / 3.0)
        assert not fast_shock_right(burgers, 1.5, 0.5, 0.0, A)
        assert set(s.to_dict()) == {"mu_r", "mu_l", "mu", "I_r", "I_l"}

    def test_speeds_right_fast(self, burgers):
        """Fast-shock data: mu_l > mu_r."""
        s = speeds_right(burgers, 3.5, -1.0, -1.0, A)
        assert (s.I_r, s.I_l) == (1.0, 3.5)
        assert s.mu_r == pytest.approx(-0.5)
        assert s.mu_l == pytest.approx(0.875)
        assert s.mu == pytest.approx(0.703125)
        assert fast_shock_right(burgers, 3.5, -1.0, -1.0, A)

    def test_speeds_left(self, burgers):
        """Mirror family."""
        s = speeds_left(burgers, -0.5, -1.5, 0.0, A)
        assert (s.J_l, s.J_r) == (0.5, 0.5)
        assert s.nu_l == pytest.approx(-0.75)
        assert s.nu_r == pytest.approx(-0.625)
        assert s.nu == pytest.approx(-2.0 / 3.0)
        assert not fast_shock_left(burgers, -0.5, -1.5, 0.0, A)

    def test_families_vectorized(self, burgers):
        """The shared families match the scalar speeds entry for entry."""
        mu_r, mu_l, mu, I_r, I_l = right_family(
            burgers, np.array([1.5, 3.5]), np.array([0.5, -1.0]), np.array([0.0, -1.0]), A
        )
        assert np.allclose(mu_r, [0.75, -0.5])
        assert np.allclose(mu_l, [0.625, 0.875])
        assert np.allclose(mu, [2.0 / 3.0, 0.703125])
        assert list(I_r) == [0.5, 1.0]
        assert list(I_l) == [0.5, 3.5]

        s = speeds_left(burgers, -0.5, -1.5, 0.0, A)
        family = [float(v) for v in left_family(burgers, -0.5, -1.5, 0.0, A)[:3]]
        assert family == pytest.approx([s.nu_l, s.nu_r, s.nu])

    def test_exceeds_tolerance(self):
        """Differences inside the relative dispatch tolerance do not count."""
        assert not exceeds(1.0 + 1e-14, 1.0)
        assert exceeds(1.0 + 1e-9, 1.0)
        assert list(exceeds(np.array([2.0, 1e6 + 1e-7]), np.array([1.0, 1e6]))) == [True, False]

    def test_speeds_reject_bad_ordering(self, burgers):
        """The edge must sit between the states."""
        with pytest.raises(ValueError, match="speeds_right"):
            speeds_right(burgers, 0.5, 1.5, 0.0, A)
        with pytest.raises(ValueError, match="speeds_left"):
            speeds_left(burgers, 3.0, 2.0, 0.0, A)

    def test_fast_shock_vectorized(self, burgers):
        """Predicates broadcast over arrays."""
        result = fast_shock_right(
            burgers, np.array([3.5, 1.5]), np.array([-1.0, 0.5]), np.array([-1.0, 0.0]), A
        )
        assert list(result) == [True, False]


class TestNumericalFluxes:
    """Tests for h1 and h2 at the cell interfaces."""

    def test_values(self, burgers):
        """Godunov branch and both fast-shock branches."""
        assert h1_plus(1.0, 3.0, 3.0, burgers, A) == pytest.approx(1.25)
        assert h1_plus(3.5, -1.0, -1.0, burgers, A) == pytest.approx(3.6640625)
        assert h2_plus(3.5, -1.0, -1.0, burgers, A) == pytest.approx(2.4609375)
        assert h1_minus(1.0, -3.5, 1.0, burgers, A) == pytest.approx(3.6640625)
        assert h2_minus(1.0, -3.5, 1.0, burgers, A) == pytest.approx(6.125 - 3.6640625)

    def test_consistency(self, burgers):
        """h1(u, u, w) = f(u) and h2(u, u, w) = 0 inside the strip."""
        u = np.linspace(-3, 3, 13)
        w = u + np.linspace(-1, 1, 13)
        for h1, h2 in ((h1_plus, h2_plus), (h1_minus, h2_minus)):
            assert np.allclose(h1(u, u, w, burgers, A), burgers(u))
            assert np.allclose(h2(u, u, w, burgers, A), 0.0)

    @pytest.mark.parametrize("name", ["burgers", "quartic", "quartic-shifted"])
    def test_oracle_equivalence(self, name):
        """Without a fast shock h1 is the Tilde flux of the cell at the exact interface trace."""
        f = get_flux(name)
        rng = np.random.default_rng(15)
        u = rng.uniform(-2.0, 2.0, (1500, 2))
        w = u + rng.uniform(-A, A, (1500, 2))
        checked = 0
        for (ul, ur), (wl, wr) in zip(u, w):
            fan = solve(RiemannProblem(PlayState(ul, wl), PlayState(ur, wr), A, f))
            if not fast_shock_right(f, ul, ur, wr, A):
                oracle = modified_eval(f, ModifiedFlux.tilde(wr), A, trace(fan, "right").u)
                assert h1_plus(ul, ur, wr, f, A) == pytest.approx(oracle, abs=1e-8)
                checked += 1
            if not fast_shock_left(f, ul, ur, wl, A):
                oracle = modified_eval(f, ModifiedFlux.tilde(wl), A, trace(fan, "left").u)
                assert h1_minus(ul, ur, wl, f, A) == pytest.approx(oracle, abs=1e-8)
                checked += 1
        assert checked > 2000

    def test_strip_check(self, burgers):
        """The cell's own pair must lie in the strip."""
        with pytest.raises(ValueError, match="beta"):
            h1_plus(0.0, 3.0, 0.0, burgers, A)
        with pytest.raises(ValueError, match="alpha"):
            h1_minus(3.0, 0.0, 0.0, burgers, A)


def _triples(rng, n, a):
    alpha = rng.uniform(-3, 3, n)
    beta = rng.uniform(-3, 3, n)
    gamma = beta + rng.uniform(-a, a, n)
    return alpha, beta, gamma


class TestMonotonicity:
    """Seeded sweeps of the monotonicity and Lipschitz properties."""

    N = 100_000
    TOL = 1e-9

    def _perturbations(self, rng):
        return rng.uniform(0.0, 0.5, self.N)

    def test_plus_fluxes(self, burgers):
        """h1+ up in alpha, gamma and down in beta; h2+ up in alpha, beta and down in gamma."""
        rng = np.random.default_rng(11)
        alpha, beta, gamma = _triples(rng, self.N, A)
        delta = self._perturbations(rng)

        def h1(x, y, z):
            return h1_plus(x, y, z, burgers, A)

        def h2(x, y, z):
            return h2_plus(x, y, z, burgers, A)

        base1, base2 = h1(alpha, beta, gamma), h2(alpha, beta, gamma)
        assert np.all(h1(alpha + delta, beta, gamma) >= base1 - self.TOL)
        assert np.all(h2(alpha + delta, beta, gamma) >= base2 - self.TOL)

        d_beta = np.minimum(delta, gamma + A - beta)
        assert np.all(h1(alpha, beta + d_beta, gamma) <= base1 + self.TOL)
        assert np.all(h2(alpha, beta + d_beta, gamma) >= base2 - self.TOL)

        d_gamma = np.minimum(delta, beta + A - gamma)
        assert np.all(h1(alpha, beta, gamma + d_gamma) >= base1 - self.TOL)
        assert np.all(h2(alpha, beta, gamma + d_gamma) <= base2 + self.TOL)

    def test_minus_fluxes(self, burgers):
        """h1- up in alpha and down in beta, gamma; h2- up in gamma and down in alpha, beta."""
        rng = np.random.default_rng(12)
        beta, alpha, gamma = _triples(rng, self.N, A)
        delta = self._perturbations(rng)

        def h1(x, y, z):
            return h1_minus(x, y, z, burgers, A)

        def h2(x, y, z):
            return h2_minus(x, y, z, burgers, A)

        base1, base2 = h1(alpha, beta, gamma), h2(alpha, beta, gamma)
        d_alpha = np.minimum(delta, gamma + A - alpha)
        assert np.all(h1(alpha + d_alpha, beta, gamma) >= base1 - self.TOL)
        assert np.all(h2(alpha + d_alpha, beta, gamma) <= base2 + self.TOL)

        assert np.all(h1(alpha, beta + delta, gamma) <= base1 + self.TOL)
        assert np.all(h2(alpha, beta + delta, gamma) <= base2 + self.TOL)

        d_gamma = np.minimum(delta, alpha + A - gamma)
        assert np.all(h1(alpha, beta, gamma + d_gamma) <= base1 + self.TOL)
        assert np.all(h2(alpha, beta, gamma + d_gamma) >= base2 - self.TOL)

    def test_lipschitz_in_states(self, burgers):
        """All four fluxes are L-Lipschitz in alpha and beta."""
        rng = np.random.default_rng(13)
        alpha, beta, gamma = _triples(rng, self.N, A)
        delta = self._perturbations(rng)
        L = lipschitz_on(burgers, -3.5, 3.5)

        for h in (h1_plus, h2_plus):
            base = h(alpha, beta, gamma, burgers, A)
            moved = h(alpha + delta, beta, gamma, burgers, A)
            assert np.all(np.abs(moved - base) <= L * delta + self.TOL)
            d_beta = np.minimum(delta, gamma + A - beta)
            moved = h(alpha, beta + d_beta, gamma, burgers, A)
            assert np.all(np.abs(moved - base) <= L * d_beta + self.TOL)

        beta, alpha = alpha, beta
        for h in (h1_minus, h2_minus):
            base = h(alpha, beta, gamma, burgers, A)
            moved = h(alpha, beta + delta, gamma, burgers, A)
            assert np.all(np.abs(moved - base) <= L * delta + self.TOL)
            d_alpha = np.minimum(delta, gamma + A - alpha)
            moved = h(alpha + d_alpha, beta, gamma, burgers, A)
            assert np.all(np.abs(moved - base) <= L * d_alpha + self.TOL)

    def test_split_of_godunov_flux(self, burgers):
        """h1 + h2 reproduces the Godunov flux of f to 1e-12 on both sides."""
        rng = np.random.default_rng(14)
        alpha, beta, gamma = _triples(rng, 1000, A)
        g = godunov_two_point(burgers, alpha, beta)
        total = h1_plus(alpha, beta, gamma, burgers, A) + h2_plus(alpha, beta, gamma, burgers, A)
        assert np.allclose(total, g, atol=1e-12, rtol=0)

        beta, alpha = alpha, beta
        g = godunov_two_point(burgers, alpha, beta)
        total = h1_minus(alpha, beta, gamma, burgers, A) + h2_minus(alpha, beta, gamma, burgers, A)
        assert np.allclose(total, g, atol=1e-12, rtol=0)
