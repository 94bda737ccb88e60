"""Tests for scenario runs, artifacts, refinement studies and Riemann reports."""

import numpy as np
import pytest

from playfv.config import PlayfvConfig
from playfv.hysteresis import PlayState
from playfv.riemann import RiemannProblem, solve
from playfv.runner import (
    BoundaryTouchError,
    build_run,
    convergence_study,
    describe_fan,
    load_run,
    riemann_report,
    run_scenario,
    shock_location,
    stability_study,
)
from playfv.scenarios import get_preset, scenario_from_dict


def _small(name, dx=0.02):
    return get_preset(name).with_dx(dx)


@pytest.fixture
def config(tmp_path):
    """Default settings writing under tmp_path."""
    cfg = PlayfvConfig()
    cfg.output.output_dir = tmp_path / "runs"
    return cfg


class TestBuildRun:
    """Tests for build_run."""

    def test_preset(self):
        """Grid and initial layer follow the scenario."""
        grid, cfg, initial = build_run(get_preset("fast-shock"))
        assert grid.n_cells == 400
        assert cfg.a == 1.0
        assert initial.u[0] == 1.5
        assert initial.w[-1] == -1.0


class TestRunScenario:
    """Tests for run_scenario."""

    @pytest.mark.parametrize("name", [
        "fast-shock", "rr-centered", "rr-left", "rr-right", "two-shock-left", "two-shock-right",
    ])
    def test_riemann_presets(self, config, name):
        """Diagnostics pass and the exact fan is matched in L1."""
        result = run_scenario(get_preset(name), config, write=False)
        assert result.passed, result.ledger.summary.failures
        assert result.final.t == get_preset(name).t_end
        for eu, ew in result.exact_errors.values():
            assert eu <= 0.05
            assert ew <= 0.05

    def test_fast_shock_position(self, config):
        """The fast shock travels at 0.15625."""
        scenario = get_preset("fast-shock")
        result = run_scenario(scenario, config, write=False)
        grid, _, _ = build_run(scenario)
        x = grid.centers
        right = x > 0.02
        location = shock_location(
            x[right], result.final.u[right], PlayState(1.5, 0.5), PlayState(-1.0, -1.0)
        )
        assert location == pytest.approx(0.15625 * scenario.t_end, abs=2 * scenario.dx)

    def test_artifacts(self, config):
        """Snapshots, exact fans, ledger and metadata are written."""
        scenario = _small("two-shock-right")
        result = run_scenario(scenario, config)
        run_dir = config.output.output_dir / "two-shock-right"
        assert result.run_dir == run_dir
        names = {p.name for p in result.files}
        assert names == {"snapshot_t0.5.csv", "exact_t0.5.csv", "ledger.csv", "metadata.yaml"}
        snapshot = np.loadtxt(run_dir / "snapshot_t0.5.csv", delimiter=",", skiprows=1)
        assert snapshot.shape == (200, 3)

        metadata = load_run(run_dir)
        assert metadata["scenario"]["name"] == "two-shock-right"
        assert metadata["grid"]["n_cells"] == 200
        assert metadata["result"]["diagnostics"]["passed"]

    def test_output_dir_override(self, config, tmp_path):
        """An explicit output_dir wins over the config."""
        result = run_scenario(_small("rr-right", 0.05), config, output_dir=tmp_path / "elsewhere")
        assert result.run_dir == tmp_path / "elsewhere" / "rr-right"

    def test_config_switches(self, config):
        """Disabled outputs are not written."""
        config.output.write_exact = False
        config.output.write_ledger = False
        result = run_scenario(_small("rr-left", 0.05), config)
        assert {p.name for p in result.files} == {"snapshot_t0.25.csv", "metadata.yaml"}

    def test_comparison_runs(self, config):
        """Bump scenarios also run without hysteresis at f and f/2."""
        scenario = scenario_from_dict({
            "name": "bump",
            "flux": "burgers",
            "a": 1.0,
            "initial": {"kind": "gaussian", "amplitude": 1.0, "width": 0.5},
            "domain": [-4.0, 4.0],
            "dx": 0.05,
            "output_times": [0.1, 0.2],
            "comparison": "non-hysteretic-pair",
        })
        result = run_scenario(scenario, config)
        assert set(result.comparisons) == {"full", "half"}
        assert set(result.comparisons["full"]) == {0.1, 0.2}
        assert result.exact_errors == {}
        names = {p.name for p in result.files}
        assert "comparison_half_t0.2.csv" in names
        assert result.passed

    def test_boundary_touch(self, config):
        """Waves reaching the ends abort the run."""
        data = get_preset("rr-right").to_dict()
        data.update(domain=[-0.5, 0.5], dx=0.05)
        with pytest.raises(BoundaryTouchError) as exc:
            run_scenario(scenario_from_dict(data), config, write=False)
        assert exc.value.side == "right"

    def test_boundary_check_disabled(self, config):
        """The check can be switched off per scenario."""
        data = get_preset("rr-right").to_dict()
        data.update(domain=[-0.5, 0.5], dx=0.05, boundary_check=False)
        result = run_scenario(scenario_from_dict(data), config, write=False)
        assert result.final.t == 0.25

    @pytest.mark.slow
    def test_gaussian_energies(self, config):
        """Field energies of the bump at the reference times."""
        result = run_scenario(get_preset("gaussian"), config, write=False)
        by_time = {r.t: r for r in result.ledger.records}
        expected = {
            0.0: (22.1557, 22.1557),
            0.2: (19.2978, 22.5789),
            0.4: (17.0486, 21.8581),
            0.6: (14.9098, 21.0941),
        }
        for t, (e_u, e_w) in expected.items():
            record = by_time[t]
            assert record.energy_u == pytest.approx(e_u, rel=0.015)
            assert record.energy_w == pytest.approx(e_w, rel=0.015)
            assert record.energy == pytest.approx(e_u + e_w, rel=0.015)
        assert result.passed


class TestLoadRun:
    """Tests for load_run."""

    def test_missing_metadata(self, tmp_path):
        """Directories without metadata are rejected."""
        with pytest.raises(ValueError, match="metadata.yaml"):
            load_run(tmp_path)


class TestConvergence:
    """Tests for refinement studies."""

    def test_riemann_against_exact(self):
        """Errors fall with dx for shock data."""
        table = convergence_study(get_preset("two-shock-right").with_dx(0.04), levels=3)
        assert table.reference == "exact"
        assert table.dx == [0.04, 0.02, 0.01]
        assert table.monotone
        assert table.observed_order > 0.5
        assert len(table.to_dict()["levels"]) == 3

    @pytest.mark.slow
    def test_bump_against_finest(self):
        """Smooth data uses the finest grid as reference."""
        scenario = scenario_from_dict({
            "name": "bump",
            "flux": "burgers",
            "a": 1.0,
            "initial": {"kind": "gaussian", "amplitude": 1.0, "width": 0.5},
            "domain": [-4.0, 4.0],
            "dx": 0.08,
            "output_times": [0.3],
        })
        table = convergence_study(scenario, levels=3)
        assert table.reference == "finest"
        assert table.monotone

    def test_too_few_levels(self):
        """At least three grids."""
        with pytest.raises(ValueError, match="3"):
            convergence_study(get_preset("rr-right"), levels=2)
        with pytest.raises(ValueError, match="3"):
            convergence_study(get_preset("rr-right"), refinements=[0.1, 0.05])


class TestStabilityStudy:
    """Tests for runs checked against a perturbed copy."""

    def test_riemann_preset(self, config):
        """Distance never grows and the recorded history passes every check."""
        report = stability_study(_small("rr-right", 0.05), 0.1, config)
        assert report.passed
        assert report.contraction.distances[0] == pytest.approx(0.2 * 2.0, rel=1e-9)
        assert report.contraction.distances[-1] <= report.contraction.distances[0]
        assert report.steps == len(report.contraction.distances) - 1
        assert report.energy.passed
        assert report.compactness.tv_non_increasing
        assert report.to_dict()["passed"]

    def test_contraction_tolerance_from_config(self, config):
        """The configured tolerance scales the allowed increase."""
        config.diagnostics.contraction_tol = 1e-3
        report = stability_study(_small("two-shock-right", 0.05), -0.1, config)
        assert report.contraction.tolerance == pytest.approx(1e-3 * report.contraction.distances[0])

    def test_zero_delta(self, config):
        """Identical runs are not a study."""
        with pytest.raises(ValueError, match="delta"):
            stability_study(get_preset("rr-right"), 0.0, config)


class TestRiemannReport:
    """Tests for riemann_report and helpers."""

    def test_report(self, burgers, tmp_path):
        """Text, samples and CSV."""
        problem = RiemannProblem(PlayState(1.5, 2.0), PlayState(-1.0, -1.0), 1.0, burgers)
        report = riemann_report(problem, 1.0, (-1.0, 1.0), samples=201)
        lines = report.text.splitlines()
        assert lines[0].startswith("contact")
        assert "fast" in lines[1]
        assert report.u[0] == 1.5
        assert report.u[-1] == -1.0
        path = report.write_csv(tmp_path / "fan.csv")
        assert path.read_text().splitlines()[0] == "x,u,w"
        assert report.to_dict()["t"] == 1.0

    def test_bad_arguments(self, burgers):
        """t must be positive and at least two samples are needed."""
        problem = RiemannProblem(PlayState(0.0, 0.0), PlayState(0.0, 0.0), 1.0, burgers)
        with pytest.raises(ValueError, match="positive"):
            riemann_report(problem, 0.0)
        with pytest.raises(ValueError, match="samples"):
            riemann_report(problem, 1.0, samples=1)

    def test_no_waves(self, burgers):
        """Constant data is described as such."""
        problem = RiemannProblem(PlayState(0.5, 0.0), PlayState(0.5, 0.0), 1.0, burgers)
        assert riemann_report(problem, 1.0).text == "no waves"

    def test_describe_two_shocks(self, burgers):
        """One line per wave with kinds and speeds."""
        problem = RiemannProblem(PlayState(1.5, 2.0), PlayState(0.5, 0.0), 1.0, burgers)
        lines = describe_fan(solve(problem)).splitlines()
        assert lines == [
            "contact: u=1.5, w 2 -> 0.5",
            "shock (coupled): (1.5, 0.5) -> (1, 0), sigma=0.625",
            "shock (u-only): (1, 0) -> (0.5, 0), sigma=0.75",
        ]


class TestShockLocation:
    """Tests for shock_location."""

    def test_interpolates(self):
        """Mid value crossing between two cells."""
        x = np.array([0.0, 1.0, 2.0, 3.0])
        u = np.array([2.0, 2.0, 0.0, 0.0])
        assert shock_location(x, u, PlayState(2.0, 0.0), PlayState(0.0, 0.0)) == pytest.approx(1.5)

    def test_rising_profile(self):
        """Profiles rising left to right are handled too."""
        x = np.array([0.0, 1.0, 2.0])
        u = np.array([-1.0, 0.0, 1.0])
        assert shock_location(x, u, PlayState(-1.0, 0.0), PlayState(1.0, 0.0)) == pytest.approx(1.0)
