"""Configuration management for finite-ages."""

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path


CONFIG_DIR = Path.home() / ".config" / "finite-ages"
CONFIG_FILE = CONFIG_DIR / "config.json"

SCALAR_MODES = ("rational", "float")


def config_path() -> Path:
    """Return the config file path, honouring FINITE_AGES_CONFIG."""
    override = os.environ.get("FINITE_AGES_CONFIG")
    return Path(override) if override else CONFIG_FILE


@dataclass
class Config:
    """Application configuration."""

    tolerance: float = 1e-9
    seed: int = 0
    jobs: int = 1
    max_size: int = 4
    search_bound: int = 8
    # Soft limits for exhaustive searches
    max_free_tuples: int = 20
    search_budget: int = 200_000
    omega_exact_limit: int = 24
    condition5_subset_limit: int = 12
    scalar_mode: str = "rational"
    log_level: str = "WARNING"

    @classmethod
    def load(cls) -> "Config":
        """Load config from file, or return defaults."""
        path = config_path()
        if not path.exists():
            return cls()

        try:
            with open(path) as f:
                data = json.load(f)
        except (json.JSONDecodeError, OSError):
            return cls()
        if not isinstance(data, dict):
            return cls()

        defaults = cls()
        values = {}
        for fld in fields(cls):
            default = getattr(defaults, fld.name)
            value = data.get(fld.name, default)
            # Keep the default when the stored value has the wrong type
            try:
                values[fld.name] = type(default)(value)
            except (TypeError, ValueError):
                values[fld.name] = default
        if values["scalar_mode"] not in SCALAR_MODES:
            values["scalar_mode"] = defaults.scalar_mode
        return cls(**values)

    def save(self) -> None:
        """Save config to file."""
        path = config_path()
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(asdict(self), f, indent=2)


def get_config() -> Config:
    """Get the application config."""
    return Config.load()
