"""Unit tests for dofusion.core.config module."""

import os
from pathlib import Path
from unittest.mock import patch


class TestGetConfigPath:
    """Tests for _get_config_path."""

    def test_uses_xdg_config_home(self, tmp_path):
        """XDG_CONFIG_HOME takes precedence."""
        from dofusion.core.config import _get_config_path

        with patch.dict(os.environ, {"XDG_CONFIG_HOME": str(tmp_path)}):
            assert _get_config_path() == tmp_path / "dofusion" / "config.toml"

    def test_falls_back_to_home(self):
        """Without XDG_CONFIG_HOME the file lives under ~/.config."""
        from dofusion.core.config import _get_config_path

        with patch.dict(os.environ, {}, clear=True):
            assert _get_config_path() == Path.home() / ".config" / "dofusion" / "config.toml"


class TestConfig:
    """Tests for Config loading and saving."""

    def test_defaults(self):
        """Built-in defaults match the documented budget."""
        from dofusion.core.config import Config

        config = Config()

        assert config.search.max_steps == 12
        assert config.search.max_term_width == 8
        assert config.oracle.seeds == 100
        assert config.oracle.tolerance == 1e-9
        assert config.output.format == "text"

    def test_load_missing_file(self, tmp_path):
        """A missing file gives defaults."""
        from dofusion.core.config import Config

        config = Config.load(tmp_path / "absent.toml")

        assert config == Config()

    def test_load_values(self, tmp_path):
        """Sections override their fields; integers widen to floats."""
        from dofusion.core.config import Config

        path = tmp_path / "config.toml"
        path.write_text("[search]\nmax_steps = 20\n\n[oracle]\ntolerance = 0\nseeds = 10\n")

        config = Config.load(path)

        assert config.search.max_steps == 20
        assert config.oracle.seeds == 10
        assert config.oracle.tolerance == 0.0
        assert isinstance(config.oracle.tolerance, float)

    def test_unknown_key_ignored(self, tmp_path, caplog):
        """Unknown keys are logged and skipped."""
        from dofusion.core.config import Config

        path = tmp_path / "config.toml"
        path.write_text("[search]\nmax_depth = 3\n")

        config = Config.load(path)

        assert config == Config()
        assert "max_depth" in caplog.text

    def test_malformed_file(self, tmp_path, caplog):
        """A file that does not parse falls back to defaults."""
        from dofusion.core.config import Config

        path = tmp_path / "config.toml"
        path.write_text("[search\n")

        assert Config.load(path) == Config()
        assert "Failed to load config" in caplog.text

    def test_save_only_changes(self, tmp_path):
        """Only non-default values are written."""
        from dofusion.core.config import Config

        config = Config()
        config.search.workers = 4
        config.output.format = "json"
        path = tmp_path / "sub" / "config.toml"

        config.save(path)

        text = path.read_text()
        assert "[search]\nworkers = 4\n" in text
        assert '[output]\nformat = "json"\n' in text
        assert "[oracle]" not in text

    def test_save_then_load(self, tmp_path):
        """A saved configuration loads back."""
        from dofusion.core.config import Config

        config = Config()
        config.oracle.gap = 1e-4
        config.search.max_states = 5000
        path = tmp_path / "config.toml"
        config.save(path)

        assert Config.load(path) == config


class TestGetConfig:
    """Tests for the global configuration."""

    def test_singleton(self):
        """get_config loads once and then returns the same instance."""
        from dofusion.core import config as config_module

        with (
            patch.object(config_module, "_config", None),
            patch.object(config_module.Config, "load", return_value=config_module.Config()) as load,
        ):
            first = config_module.get_config()
            second = config_module.get_config()

        assert first is second
        load.assert_called_once()
