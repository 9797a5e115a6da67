"""Run specifications of the command-line front end and golden regression records."""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
import json
import logging

from config import load_flat_config
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


class OutputFormat(Enum):
    """Formats a run result can be written in."""
    CSV = "csv"
    JSON = "json"
    TEXT = "text"


# Keys accepted by every subcommand
GLOBAL_KEYS = {"threads": 0, "deterministic": False, "output": None, "format": "text"}

# Parameters of each subcommand with their defaults; None defers to config.py
SUBCOMMAND_PARAMETERS: Dict[str, Dict[str, Any]] = {
    "scattering": {"potential": None, "r_max": None, "tol": None, "fourier": None, "profile": False},
    "neumann": {"core": None, "ell": None, "tol": None, "r": None, "ell0": None},
    "elambda": {"mmax": None, "accelerate": None},
    "bracket": {"variant": "gp", "a": None, "potential": None, "vhat0": None, "cutoff": None, "tail": None},
    "born": {"potential": None, "n": None, "beta": None, "order": None, "cutoff": None, "geometry": "torus"},
    "lhy": {"a": None, "rho": None},
    "energy": {"regime": "gp", "n": None, "a": None, "potential": None, "beta": None,
               "cutoff": None, "mmax": None, "order": None},
    "spectrum": {"kind": "gp", "a": None, "potential": None, "vhat0": None, "zeta": None, "guard": None},
    "vmc": {"L": 1.0, "N": None, "core": None, "ell": None, "steps": None, "burn_in": None,
            "seed": 0, "chains": None, "step_size": None, "append": None},
    "probe": {"ell_min": 1e-3, "ell_max": 1e-2, "points": 5, "n_for_proxy": None,
              "samples": None, "seed": 0, "a": None},
    "golden": {"records": None},
}

PROVENANCE_TAGS = ("paper", "derived", "regression")


@dataclass
class RunSpec:
    """One invocation: subcommand, merged parameters and output target."""
    subcommand: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    output: Optional[str] = None
    output_format: OutputFormat = OutputFormat.TEXT
    threads: int = 0
    deterministic: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMAND_PARAMETERS:
            raise ConfigurationError(f"Unknown subcommand '{self.subcommand}'")
        allowed = SUBCOMMAND_PARAMETERS[self.subcommand]
        unknown = sorted(set(self.parameters) - set(allowed))
        if unknown:
            raise ConfigurationError(f"Unknown key(s) for '{self.subcommand}': {', '.join(unknown)}")
        merged = dict(allowed)
        merged.update(self.parameters)
        self.parameters = merged
        if self.threads < 0:
            raise ConfigurationError(f"threads must be non-negative, got {self.threads}")

    @classmethod
    def from_sources(cls, subcommand: str, flags: Dict[str, Any],
                     config_path: Optional[Union[str, Path]] = None) -> "RunSpec":
        """Merge a flat config file with command-line flags; flags win.

        Flags whose value is None were not given and leave file values alone.
        """
        if subcommand not in SUBCOMMAND_PARAMETERS:
            raise ConfigurationError(f"Unknown subcommand '{subcommand}'")
        allowed = set(SUBCOMMAND_PARAMETERS[subcommand]) | set(GLOBAL_KEYS)
        values: Dict[str, Any] = dict(GLOBAL_KEYS)
        if config_path is not None:
            values.update(load_flat_config(config_path, allowed_keys=allowed))
            logger.debug(f"Loaded run configuration from {config_path}")
        for key, value in flags.items():
            if value is None:
                continue
            if key not in allowed:
                raise ConfigurationError(f"Unknown key '{key}' for '{subcommand}'")
            values[key] = value
        try:
            output_format = OutputFormat(str(values.pop("format")).lower())
        except ValueError as e:
            raise ConfigurationError(f"Unknown output format: {e}") from e
        return cls(
            subcommand=subcommand,
            output=values.pop("output"),
            output_format=output_format,
            threads=int(values.pop("threads")),
            deterministic=bool(values.pop("deterministic")),
            parameters=values,
        )

    def get(self, key: str, default: Any = None) -> Any:
        value = self.parameters.get(key)
        return default if value is None else value

    def require(self, key: str) -> Any:
        """Value of a mandatory parameter."""
        value = self.parameters.get(key)
        if value is None:
            raise ConfigurationError(f"'{self.subcommand}' needs --{key.replace('_', '-')}")
        return value

    def canonical_parameters(self) -> Dict[str, Any]:
        """Explicitly set parameters, sorted by key."""
        return {key: self.parameters[key] for key in sorted(self.parameters) if self.parameters[key] is not None}


@dataclass
class GoldenRecord:
    """A pinned result: rerun ``subcommand`` with ``parameters`` and compare ``expected`` values."""
    subcommand: str
    parameters: Dict[str, Any]
    expected: Dict[str, float]
    tolerances: Dict[str, float]
    provenance: str = "regression"
    name: str = ""

    def __post_init__(self):
        if self.subcommand not in SUBCOMMAND_PARAMETERS or self.subcommand == "golden":
            raise ConfigurationError(f"Golden record names unknown subcommand '{self.subcommand}'")
        if self.provenance not in PROVENANCE_TAGS:
            raise ConfigurationError(f"Provenance must be one of {PROVENANCE_TAGS}, got '{self.provenance}'")
        if not self.expected:
            raise ConfigurationError("Golden record has no expected values")
        missing = sorted(set(self.expected) - set(self.tolerances))
        if missing:
            raise ConfigurationError(f"Golden record lacks tolerances for: {', '.join(missing)}")
        for key, tolerance in self.tolerances.items():
            if tolerance < 0:
                raise ConfigurationError(f"Tolerance for '{key}' must be non-negative, got {tolerance}")
            if tolerance == 0:
                logger.warning(f"Golden record '{self.label}' pins '{key}' with tolerance 0; "
                               f"only an exact match passes")
        self.parameters = {key: self.parameters[key] for key in sorted(self.parameters)}

    @property
    def label(self) -> str:
        return self.name or self.subcommand

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "expected": self.expected,
            "tolerances": self.tolerances,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GoldenRecord":
        try:
            tolerance = data.get("tolerance")
            expected = {key: float(value) for key, value in data["expected"].items()}
            tolerances = data.get("tolerances")
            if tolerances is None:
                tolerances = {key: float(tolerance) for key in expected} if tolerance is not None else {}
            return cls(
                subcommand=data["subcommand"],
                parameters=dict(data.get("parameters", {})),
                expected=expected,
                tolerances={key: float(value) for key, value in tolerances.items()},
                provenance=data.get("provenance", "regression"),
                name=data.get("name", ""),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ConfigurationError(f"Malformed golden record: {e}") from e


def load_golden_records(path: Union[str, Path]) -> List[GoldenRecord]:
    """Read a JSON list of golden records; an empty file holds no records."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"Cannot read golden records {path}: {e}") from e
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Golden records {path} are not valid JSON: {e}") from e
    if isinstance(data, dict):
        data = data.get("records", [])
    if not isinstance(data, list):
        raise ConfigurationError(f"Golden records {path} must hold a list of records")
    return [GoldenRecord.from_dict(item) for item in data]


@dataclass
class RunResult:
    """What a subcommand produced: a flat payload, optional table rows and a one-line summary."""
    summary: str
    payload: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    columns: Optional[List[str]] = None
    exit_status: int = 0
