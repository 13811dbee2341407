"""Experiment configuration: flat key-value text with dotted sections.

Lines look like ``flow.step = 0.2``; ``#`` starts a comment.  Every command
declares the keys it accepts; unknown keys are rejected, missing ones fall
back to the documented defaults.  parse -> serialize -> parse is the
identity on the normalized record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_vec(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated reals, got {text!r}") from exc


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, tuple):
        return ",".join(f"{v:.17g}" for v in value)
    return str(value)


_PARSERS = {
    "int": int,
    "float": float,
    "bool": _parse_bool,
    "str": str,
    "vec": _parse_vec,
}


@dataclass(frozen=True)
class Key:
    name: str
    type: str
    default: object = None
    required: bool = False
    choices: tuple | None = None
    minimum: float | None = None
    maximum: float | None = None

    def coerce(self, raw: str):
        try:
            value = _PARSERS[self.type](raw)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key {self.name}: cannot parse {raw!r} as {self.type}") from exc
        self.check(value)
        return value

    def check(self, value):
        if self.choices is not None and value not in self.choices:
            raise ConfigError(f"key {self.name}: {value!r} not one of {sorted(self.choices)}")
        if self.minimum is not None and value < self.minimum:
            raise ConfigError(f"key {self.name}: {value} below minimum {self.minimum}")
        if self.maximum is not None and value > self.maximum:
            raise ConfigError(f"key {self.name}: {value} above maximum {self.maximum}")


_EPS = dict(type="float", minimum=1e-9, maximum=math.pi / 2 - 1e-9)

COMMAND_KEYS: dict[tuple[str, str], tuple[Key, ...]] = {
    ("grassmann", "geodesic"): (
        Key("grassmann.p", "int", 2, minimum=1, maximum=3),
        Key("grassmann.n", "int", 4, minimum=2, maximum=8),
        Key("grassmann.steps", "int", 50, minimum=2),
    ),
    ("grassmann", "tmax"): (
        Key("grassmann.rates", "vec", (math.sqrt(0.5), math.sqrt(0.5))),
    ),
    ("grassmann", "region"): (
        Key("grassmann.p", "int", 2, choices=(2,)),
        Key("grassmann.n", "int", 4, minimum=4, maximum=8),
        Key("grassmann.epsilon", default=0.3, **_EPS),
        Key("grassmann.count", "int", 200, minimum=1),
    ),
    ("sphere", "region"): (
        Key("sphere.m", "int", 3, minimum=2, maximum=8),
        Key("sphere.epsilon", default=0.3, **_EPS),
        Key("sphere.samples", "int", 2000, minimum=1),
        Key("sphere.band", "float", 1e-6, minimum=0.0),
    ),
    ("sphere", "disconnect"): (
        Key("sphere.m", "int", 3, minimum=2, maximum=8),
        Key("sphere.epsilon", default=0.3, **_EPS),
        Key("sphere.samples", "int", 10000, minimum=1000),
        Key("sphere.t0", "float", 0.0),
        Key("sphere.neighbors", "int", 12, minimum=2),
        Key("sphere.cutoff_factor", "float", 3.5, minimum=0.5),
    ),
    ("quadric", "roundtrip"): (
        Key("quadric.k", "int", 2, minimum=1, maximum=6),
        Key("quadric.count", "int", 1000, minimum=1),
    ),
    ("quadric", "chart"): (
        Key("quadric.k", "int", 2, minimum=1, maximum=6),
        Key("quadric.count", "int", 20, minimum=1),
    ),
    ("flow", "run"): (
        Key("flow.domain", "str", "torus-grid", choices=("torus-grid", "icosphere")),
        Key("flow.nu", "int", 32, minimum=8),
        Key("flow.nv", "int", 32, minimum=8),
        Key("flow.level", "int", 3, minimum=2, maximum=6),
        Key("flow.target", "str", "sphere", choices=("sphere", "product-spheres", "grassmann-2-4")),
        Key("flow.target_dim", "int", 2, minimum=1, maximum=8),
        Key(
            "flow.init",
            "str",
            "cap",
            choices=("cap", "identity", "great-circle", "constant"),
        ),
        Key("flow.cap_radius", "float", 0.4, minimum=1e-6, maximum=math.pi / 2),
        Key("flow.mode", "str", "free", choices=("free", "region-constrained")),
        Key("flow.step", "float", 0.0, minimum=0.0),  # 0 = domain default
        Key("flow.max_iters", "int", 50000, minimum=1),
        Key("flow.tension_tol", "float", 1e-6, minimum=0.0),
        Key("flow.oscillation_tol", "float", 1e-2, minimum=0.0),
        Key("flow.runs", "int", 1, minimum=1),
        Key("region.epsilon", default=0.3, **_EPS),
        Key("region.base", "vec", (1.0, 0.0, 0.0)),
        Key("region.direction", "vec", (0.0, 1.0, 0.0)),
    ),
    ("gauss", "audit"): (
        Key(
            "gauss.kind",
            "str",
            "clifford-torus",
            choices=("clifford-torus", "equator", "generalized-clifford"),
        ),
        Key("gauss.k", "int", 2, minimum=1, maximum=6),
        Key("gauss.m", "int", 3, minimum=2, maximum=7),
        Key("gauss.p", "int", 1, minimum=1, maximum=4),
        Key("gauss.q", "int", 1, minimum=1, maximum=4),
        Key("gauss.grid", "int", 64, minimum=2),
        Key("gauss.epsilon", default=0.3, **_EPS),
        Key("gauss.h1_zero", "bool", True),
        Key("region.base", "vec", (0.0, 0.0, 0.0, 1.0)),
        Key("region.direction", "vec", (1.0, 0.0, 0.0, 0.0)),
    ),
}

_GLOBAL_KEYS = (Key("seed", "int", 42),)


@dataclass
class ExperimentConfig:
    command: tuple[str, str]
    values: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.values["seed"])

    def __getitem__(self, key: str):
        return self.values[key]


def parse_config(command: tuple[str, str], text: str) -> ExperimentConfig:
    """Parse and validate config text for a command; fill defaults."""
    if command not in COMMAND_KEYS:
        raise ConfigError(f"unknown command {' '.join(command)!r}")
    schema = {k.name: k for k in COMMAND_KEYS[command] + _GLOBAL_KEYS}
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        name, value = (part.strip() for part in stripped.split("=", 1))
        if name in raw:
            raise ConfigError(f"line {lineno}: duplicate key {name!r}")
        raw[name] = value

    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")

    values: dict[str, object] = {}
    for name, key in schema.items():
        if name in raw:
            values[name] = key.coerce(raw[name])
        elif key.required:
            raise ConfigError(f"missing required key {name!r}")
        else:
            values[name] = key.default
    return ExperimentConfig(command, values)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{name} = {_fmt(value)}" for name, value in sorted(cfg.values.items())]
    return "\n".join(lines) + "\n"


def default_config(command: tuple[str, str]) -> ExperimentConfig:
    return parse_config(command, "")


def unit_vector(values, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ConfigError(f"{name} must be a nonzero vector")
    return v / nrm
