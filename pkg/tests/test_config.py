"""Tests for configuration loading."""

from pathlib import Path

import pytest

from playfv.config import PlayfvConfig, create_default_config, get_config_path, load_config


class TestDefaults:
    """Tests for default settings."""

    def test_defaults_without_file(self, temp_home):
        """A missing file gives the defaults."""
        config = load_config()
        assert config.log_level == "WARNING"
        assert config.output.output_dir == Path("playfv-runs")
        assert config.diagnostics.entropy_grid == 9
        assert config.diagnostics.per_cell

    def test_config_path(self, temp_home):
        """The file lives under ~/.playfv."""
        assert get_config_path() == temp_home / ".playfv" / "config.yaml"

    def test_to_dict(self):
        """Paths are serialized as strings."""
        data = PlayfvConfig().to_dict()
        assert data["output"]["output_dir"] == "playfv-runs"
        assert data["diagnostics"]["ledger_tol"] == 1e-10


class TestLoadConfig:
    """Tests for YAML and environment sources."""

    def test_file_values(self, temp_home):
        """File values override defaults."""
        path = temp_home / "custom.yaml"
        path.write_text(
            "log_level: debug\n"
            "output:\n  output_dir: /tmp/runs\n  precision: 6\n  write_exact: false\n"
            "diagnostics:\n  entropy_grid: 0\n  per_cell: false\n"
        )
        config = load_config(path)
        assert config.log_level == "DEBUG"
        assert config.output.output_dir == Path("/tmp/runs")
        assert config.output.precision == 6
        assert not config.output.write_exact
        assert config.diagnostics.entropy_grid == 0
        assert not config.diagnostics.per_cell

    def test_empty_file(self, temp_home):
        """An empty file is the same as no file."""
        path = temp_home / "empty.yaml"
        path.write_text("")
        assert load_config(path).to_dict() == PlayfvConfig().to_dict()

    def test_env_overrides_file(self, temp_home, monkeypatch):
        """PLAYFV_* variables win over the file."""
        path = temp_home / "custom.yaml"
        path.write_text("log_level: ERROR\n")
        monkeypatch.setenv("PLAYFV_LOG_LEVEL", "info")
        monkeypatch.setenv("PLAYFV_OUTPUT_DIR", str(temp_home / "out"))
        monkeypatch.setenv("PLAYFV_ENTROPY_GRID", "3")
        config = load_config(path)
        assert config.log_level == "INFO"
        assert config.output.output_dir == temp_home / "out"
        assert config.diagnostics.entropy_grid == 3

    def test_bad_entropy_grid_env(self, temp_home, monkeypatch):
        """Non-integer grid sizes are rejected."""
        monkeypatch.setenv("PLAYFV_ENTROPY_GRID", "many")
        with pytest.raises(ValueError, match="PLAYFV_ENTROPY_GRID"):
            load_config()

    @pytest.mark.parametrize("content, message", [
        ("log_level: LOUD\n", "Unknown log level"),
        ("diagnostics:\n  entropy_grid: -1\n", "entropy_grid"),
        ("output:\n  precision: 0\n", "precision"),
        ("- just\n- a list\n", "mapping"),
    ])
    def test_invalid(self, temp_home, content, message):
        """Invalid values raise ValueError."""
        path = temp_home / "bad.yaml"
        path.write_text(content)
        with pytest.raises(ValueError, match=message):
            load_config(path)


class TestCreateDefaultConfig:
    """Tests for create_default_config."""

    def test_create_and_load(self, temp_home):
        """The written file loads back to the defaults."""
        path = create_default_config()
        assert path == get_config_path()
        assert load_config(path).to_dict() == PlayfvConfig().to_dict()

    def test_existing_file(self, temp_home):
        """Existing files need force=True."""
        path = create_default_config()
        with pytest.raises(FileExistsError):
            create_default_config(path)
        assert create_default_config(path, force=True) == path
