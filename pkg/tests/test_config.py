"""Tests for configuration loading."""

import json

import pytest

from finite_ages.config import Config, config_path, get_config


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    monkeypatch.setenv("FINITE_AGES_CONFIG", str(path))
    return path


class TestConfig:
    """Test config file handling."""

    def test_env_override(self, config_file):
        """FINITE_AGES_CONFIG points at the config file."""
        assert config_path() == config_file

    def test_missing_file(self, config_file):
        """A missing file gives defaults."""
        assert get_config() == Config()

    def test_save_and_load(self, config_file):
        """Saved values load back."""
        Config(seed=5, jobs=3, scalar_mode="float").save()
        loaded = Config.load()
        assert loaded.seed == 5
        assert loaded.jobs == 3
        assert loaded.scalar_mode == "float"

    def test_invalid_json(self, config_file):
        """Broken JSON falls back to defaults."""
        config_file.write_text("{not json")
        assert Config.load() == Config()

    def test_wrong_types(self, config_file):
        """Values of the wrong type keep their defaults."""
        config_file.write_text(json.dumps({"jobs": "many", "tolerance": "1e-6", "max_size": 6}))
        loaded = Config.load()
        assert loaded.jobs == 1
        assert loaded.tolerance == 1e-6
        assert loaded.max_size == 6

    def test_unknown_scalar_mode(self, config_file):
        """Unknown scalar modes fall back to rational."""
        config_file.write_text(json.dumps({"scalar_mode": "complex"}))
        assert Config.load().scalar_mode == "rational"

    def test_unknown_keys_ignored(self, config_file):
        """Extra keys are ignored."""
        config_file.write_text(json.dumps({"theme": "dark"}))
        assert Config.load() == Config()
