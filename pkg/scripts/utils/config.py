"""
Run configuration for the twin CLI.

Each setting is resolved as: explicit flag > config file > environment >
default. Only the output directory reads the environment (TWIN_OUTPUT_DIR).

Config files are YAML (JSON is a YAML subset)::

    seed: 7
    out: runs/campaign
    sound:
      rate: 50.0e+6
      frames: 1500
      noise: off
    plan:
      workers: 4

Top-level ``seed`` / ``out`` / ``verbose`` mirror the global flags; every
other section is named after a subcommand and holds that command's options
(option names as in ``--help``, with dashes or underscores).
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from .errors import ConfigError

DEFAULT_SEED = 20240601
DEFAULT_OUTPUT_DIR = "runs"
OUTPUT_DIR_ENV = "TWIN_OUTPUT_DIR"

GLOBAL_KEYS = ("seed", "out", "verbose")

# Documented default of every subcommand option; argparse defaults are None so an
# explicit flag can be told apart from an unset one.
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "sequence": {
        "family": "glfsr", "degree": 8, "mask": 0, "state": 1, "poly1": None, "poly2": None,
        "shift": 0, "length": 128, "member": 0, "kind": "auto",
    },
    "sound": {
        "scenario": None, "link": None, "rate": 50e6, "family": "glfsr", "degree": 8,
        "length": 128, "frames": 1500, "noise": "on", "noise_floor": -100.0,
        "base_loss": 57.55, "threshold": 40.0, "min_separation": 1, "mode": "deconvolved",
        "save_iq": False,
    },
    "approximate": {
        "profiles": [], "max_taps": 4, "link": "0:1", "refine": True, "interval": 1e-3,
    },
    "validate": {
        "scenario": None, "link": None, "rate": 50e6, "family": "glfsr", "degree": 8,
        "length": 128, "frames": 100, "noise": "on", "noise_floor": -100.0,
        "base_loss": 57.55, "threshold": 40.0, "min_separation": 1, "mode": "deconvolved",
        "tolerance": 1, "frame": 0,
    },
    "heatmap": {
        "scenario": None, "frame": 0, "base_loss": 57.55, "sounded": False, "rate": 50e6,
        "family": "glfsr", "degree": 8, "length": 128, "frames": 100, "noise": "on",
        "noise_floor": -100.0, "threshold": 40.0, "min_separation": 1, "mode": "deconvolved",
    },
    "plan": {
        "matrix": None, "sidecar": None, "synthetic": None, "workers": 1, "sweep": False,
        "attenuations": "0,10,20,30,40,50",
    },
    "repro": {
        "recipes": [], "list": False,
    },
}


def _normalize_keys(section: Mapping[str, Any]) -> Dict[str, Any]:
    return {str(k).replace("-", "_"): v for k, v in section.items()}


def _coerce(value: Any, default: Any, key: str) -> Any:
    """Coerce a config-file value to the type of the option's default."""
    if value is None or default is None:
        return value
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered in ("1", "true", "yes", "on"):
                    return True
                if lowered in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            return [str(value)] if isinstance(value, (str, int)) else [str(v) for v in value]
        if isinstance(default, str):
            # YAML 1.1 reads bare on/off as booleans
            if isinstance(value, bool):
                return "on" if value else "off"
            return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"config key {key!r}: cannot use {value!r}", key=key) from e
    return value


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a YAML/JSON config file into a dict (empty file -> {})."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML ({e})") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    verbose: bool = False
    options: Dict[str, Any] = field(default_factory=dict)
    config_path: Optional[Path] = None

    def __getitem__(self, key: str) -> Any:
        try:
            return self.options[key]
        except KeyError:
            raise ConfigError(f"{self.command}: unknown option {key!r}", key=key) from None

    def get(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)

    def output_path(self, name: str) -> Path:
        """Path under the output directory, creating the directory."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / name

    @staticmethod
    def from_sources(args: argparse.Namespace,
                     config_path: Optional[Union[str, Path]] = None) -> "RunConfig":
        """
        Build the run configuration from parsed arguments and an optional
        config file. ``args.command`` names the subcommand.
        """
        command = getattr(args, "command", None) or "help"
        file_data: Dict[str, Any] = {}
        if config_path is not None:
            file_data = _normalize_keys(load_config_file(config_path))

        unknown = set(file_data) - set(GLOBAL_KEYS) - set(COMMAND_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {', '.join(sorted(unknown))}")

        defaults = COMMAND_DEFAULTS.get(command, {})
        options = dict(defaults)
        section = file_data.get(command) or {}
        if not isinstance(section, dict):
            raise ConfigError(f"config section {command!r} must be a mapping")
        for key, value in _normalize_keys(section).items():
            if key not in defaults:
                raise ConfigError(f"{command}: unknown config key {key!r}", key=key)
            options[key] = _coerce(value, defaults[key], f"{command}.{key}")
        for key in defaults:
            value = getattr(args, key, None)
            if value is not None and value != []:
                options[key] = value

        seed = getattr(args, "seed", None)
        if seed is None:
            seed = _coerce(file_data.get("seed", DEFAULT_SEED), DEFAULT_SEED, "seed")
        out = (getattr(args, "out", None) or file_data.get("out")
               or os.getenv(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)
        verbose = bool(getattr(args, "verbose", False)) or bool(
            _coerce(file_data.get("verbose", False), False, "verbose"))

        return RunConfig(
            command=command,
            seed=int(seed),
            output_dir=Path(out),
            verbose=verbose,
            options=options,
            config_path=Path(config_path) if config_path is not None else None,
        )
