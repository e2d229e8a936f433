"""Run configurations: one command, its parameters and an output path.

A config file is a JSON document {"command": ..., "params": {...}, "output": ...}.
Parameters are checked against the command's schema and missing ones take
their defaults, so a loaded config always carries the full parameter set.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from constants import LATTICE_PARAM
from errors import ConfigError

logger = logging.getLogger(__name__)


class _Required:
    def __repr__(self):
        return "REQUIRED"


REQUIRED = _Required()


@dataclass(frozen=True)
class Param:
    kind: str               # str | float | int | bool | floats | strs
    default: Any = None     # None marks an optional value, REQUIRED a mandatory one


_STRUCTURE_SOURCE = {
    "structure": Param("str", ""),
    "preset": Param("str", "paper-step"),
    "edge_variant": Param("str", "O/H/H"),
    "lattice_param": Param("float", LATTICE_PARAM),
}

SCHEMAS: Dict[str, Dict[str, Param]] = {
    "build": dict(_STRUCTURE_SOURCE),
    "dbs": dict(_STRUCTURE_SOURCE),
    "hfi": {
        **_STRUCTURE_SOURCE,
        "fixture": Param("str", ""),
        "field_dir": Param("floats"),
        "threshold": Param("float", 10.0),
        "alternatives": Param("bool", False),
        "lobe_offset": Param("float"),
        "back_lobe": Param("float", 0.0),
    },
    "fit": {
        "a": Param("float", REQUIRED),
        "b": Param("float", REQUIRED),
        "a_iso": Param("float", 0.0),
        "isotope": Param("str", "1H"),
    },
    "eseem": {
        "a": Param("float", REQUIRED),
        "b": Param("float", REQUIRED),
        "isotope": Param("str", "1H"),
        "field_T": Param("float", 0.35),
        "larmor_MHz": Param("float"),
        "tau_max_us": Param("float", 2.0),
        "steps": Param("int", 401),
        "method": Param("str", "closed-form"),
    },
    "desorb": {
        "barrier": Param("float", 0.89),
        "nu": Param("float", 1e15),
        "order": Param("float", 1.0),
        "T_C": Param("float", 465.0),
        "T_K": Param("float"),
        "theta0": Param("float", 1.0),
        "t_max_s": Param("float", 1e-6),
        "steps": Param("int", 201),
        "numerical": Param("bool", False),
    },
    "anneal": {
        "models": Param("strs", ("O/H/H", "O/OH/OH", "OH/OH")),
        "barriers": Param("floats", ()),
        "nu": Param("float", 1e15),
        "temperatures_C": Param("floats", (465.0, 600.0)),
        "duration_s": Param("float", 3600.0),
        "N0": Param("float", 4.4e13),
        "threshold": Param("float", 1.0),
    },
    "sweep": {
        "barriers": Param("floats", (0.89, 0.96, 1.12)),
        "nu": Param("float", 1e15),
        "t_min_c": Param("float", 300.0),
        "t_max_c": Param("float", 700.0),
        "t_min_k": Param("float"),
        "t_max_k": Param("float"),
        "steps": Param("int", 81),
    },
}

DEFAULT_OUTPUTS = {
    "build": "model.xyz",
    "dbs": "dbs.csv",
    "hfi": "hfi.csv",
    "fit": "fit.csv",
    "eseem": "eseem.csv",
    "desorb": "desorb.csv",
    "anneal": "anneal.csv",
    "sweep": "sweep.csv",
}

COMMANDS = tuple(SCHEMAS)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _coerce(command: str, name: str, spec: Param, value):
    """Check one value against its declared kind; sequences come back as tuples"""
    where = f"{command}.{name}"
    if value is None:
        if spec.default is None:
            return None
        raise ConfigError(f"{where} may not be null")
    if spec.kind == "str" and isinstance(value, str):
        return value
    if spec.kind == "float" and _is_number(value):
        return float(value)
    if spec.kind == "int" and isinstance(value, int) and not isinstance(value, bool):
        return value
    if spec.kind == "bool" and isinstance(value, bool):
        return value
    if spec.kind == "floats" and isinstance(value, (list, tuple)) and all(_is_number(v) for v in value):
        return tuple(float(v) for v in value)
    if spec.kind == "strs" and isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise ConfigError(f"{where} must be of type {spec.kind}, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: Mapping[str, Any] = field(default_factory=dict)
    output: str = ""

    def __post_init__(self):
        if self.command not in SCHEMAS:
            raise ConfigError(f"unknown command {self.command!r}, expected one of {', '.join(COMMANDS)}")
        schema = SCHEMAS[self.command]
        unknown = sorted(set(self.params) - set(schema))
        if unknown:
            raise ConfigError(f"unknown {self.command} parameter(s): {', '.join(unknown)}")
        resolved = {}
        for name, spec in schema.items():
            if name in self.params:
                resolved[name] = _coerce(self.command, name, spec, self.params[name])
            elif spec.default is REQUIRED:
                raise ConfigError(f"{self.command} needs parameter {name!r}")
            else:
                resolved[name] = spec.default
        object.__setattr__(self, "params", resolved)
        if not isinstance(self.output, str):
            raise ConfigError("output must be a path string")
        if not self.output:
            object.__setattr__(self, "output", DEFAULT_OUTPUTS[self.command])

    def __getitem__(self, name: str):
        return self.params[name]

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "RunConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("a run config must be an object")
        unknown = sorted(set(doc) - {"command", "params", "output"})
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "command" not in doc:
            raise ConfigError("config names no command")
        params = doc.get("params", {})
        if not isinstance(params, Mapping):
            raise ConfigError("params must be an object")
        return cls(doc["command"], dict(params), doc.get("output", ""))

    def to_dict(self) -> Dict[str, Any]:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"command": self.command, "params": params, "output": self.output}

    def updated(self, overrides: Mapping[str, Any], output: Optional[str] = None) -> "RunConfig":
        """Copy with the non-None overrides applied on top"""
        params = dict(self.params)
        params.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(self.command, params, output or self.output)


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}: {e.msg}")
    config = RunConfig.from_dict(doc)
    logger.debug("loaded %s config from %s", config.command, path)
    return config


def dump_config(config: RunConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    return path

