"""
Global configuration for the dilute Bose gas toolkit.
Contains solver tolerances, lattice truncations, sampler settings and logging.
"""

import os
import copy
from pathlib import Path
from typing import Dict, Any, Optional, Union
import json
import logging

from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Default Paths
APP_DATA = os.getenv("APPDATA") or os.path.expanduser("~/.local/share")
APP_CONFIG_DIR = os.getenv("BOSEGAS_HOME") or os.path.join(APP_DATA, "BoseGas")
CONFIG_FILE = os.path.join(APP_CONFIG_DIR, "config.json")
LOG_FILE = os.path.join(APP_CONFIG_DIR, "bosegas.log")

# Default Configuration
DEFAULT_CONFIG = {
    # Zero-energy scattering
    "scattering": {
        "r_max_factor": 10.0,   # r_max = factor * support radius
        "tol": 1e-10,
        "fit_fraction": 0.2,
        "fit_points": 200,
        "profile_points": 400,
        "max_growth": 20.0      # largest kappa * dr per integration segment
    },

    # Neumann problem on a ball
    "neumann": {
        "tol": 1e-12,
        "grid_points": 2001,
        "log_fraction": 0.1,    # radii below this fraction of ell are log-spaced
        "residual_points": 1000,
        "residual_refinements": 2
    },

    # Lattice sums
    "lattice": {
        "mmax": 40,
        "cutoff": 40.0 * 3.141592653589793,
        "tail": True,
        "accelerate": True,
        "born_order": 2,
        "born_cutoff_factor": 8.0,  # times the Fourier width 2*pi/R
        "born_kernel_grid": 24,
        "born_radial_points": 1025,
        "born_tolerance": 1e-6,
        "deterministic": True,
        "threads": 0
    },

    # Bogoliubov spectrum
    "bogoliubov": {
        "spectrum_guard": 100000
    },

    # Variational Monte Carlo
    "vmc": {
        "steps": 20000,
        "burn_in": 2000,
        "step_size": 0.1,
        "tune_interval": 100,
        "target_acceptance": (0.4, 0.6),
        "blocking_minimum": 64,
        "chains": 1
    },

    # Scaling probe
    "probe": {
        "n_for_proxy": 100000,
        "quadrature_samples": 200000,
        "scattering_length": 1.0,
        "max_fit_residual": 0.05
    },

    # Logging
    "logging": {
        "level": "WARNING",
        "file": None
    }
}


class Config:
    """Global configuration manager."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialize()
        return cls._instance

    def _initialize(self):
        """Initialize the configuration system."""
        self._config = copy.deepcopy(DEFAULT_CONFIG)

        # Load existing config if available
        if os.path.exists(CONFIG_FILE):
            try:
                with open(CONFIG_FILE, 'r') as f:
                    stored_config = json.load(f)
                    self._update_recursive(self._config, stored_config)
            except Exception as e:
                logger.error(f"Failed to load config: {e}")

    def _update_recursive(self, base: Dict[str, Any], update: Dict[str, Any]):
        """Recursively update configuration while preserving structure."""
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._update_recursive(base[key], value)
            else:
                base[key] = value

    def get(self, section: str, key: str = None):
        """Get a configuration value."""
        if key is None:
            return self._config.get(section, {})
        return self._config.get(section, {}).get(key)

    def set(self, section: str, key: str, value: Any):
        """Set a configuration value."""
        if section not in self._config:
            self._config[section] = {}
        self._config[section][key] = value

    def reset(self):
        """Restore the built-in defaults."""
        self._config = copy.deepcopy(DEFAULT_CONFIG)

    def save(self):
        """Save the current configuration to disk."""
        try:
            os.makedirs(APP_CONFIG_DIR, exist_ok=True)
            with open(CONFIG_FILE, 'w') as f:
                json.dump(self._config, f, indent=2)
        except Exception as e:
            logger.error(f"Failed to save config: {e}")


# Global configuration instance
config = Config()


def _coerce(text: str) -> Union[bool, int, float, str]:
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_flat_config(text: str, allowed_keys: Optional[set] = None,
                      source: str = "<config>") -> Dict[str, Any]:
    """Parse flat ``key=value`` text with ``#`` comments.

    Args:
        text: File contents.
        allowed_keys: Keys accepted for the target subcommand; None accepts all.
        source: Name used in error messages.

    Returns:
        Mapping of keys to coerced values.
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{number}: empty key")
        if allowed_keys is not None and key not in allowed_keys:
            raise ConfigurationError(f"{source}:{number}: unknown key '{key}'")
        values[key] = _coerce(value)
    return values


def load_flat_config(path: Union[str, Path], allowed_keys: Optional[set] = None) -> Dict[str, Any]:
    """Read and parse a flat run-configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"Cannot read config file {path}: {e}") from e
    return parse_flat_config(text, allowed_keys, source=str(path))
