"""Experiment configuration: a flat INI file with one section per concern.

Example::

    [manifold]
    num_points = 256
    circumference = 6.283185307179586
    conformal = cosine

    [hgrid]
    k_min = 3
    k_max = 10

    [symbol]
    preset = gauss
    velocity_cutoff = 4.0
    fiber_points = 256

    [algebra]
    preset = shear

    [group]
    preset = twist

    [haar]
    k_min = 1
    k_max = 5

    [run]
    seed = 1234
    output = .
    character_pairs = 20

Every field has a default, so a config file only needs the keys it
changes. Unknown sections or keys, malformed numbers, and violated
invariants (``k_min < k_max``, power-of-two grid) raise
:class:`ConfigError` naming the offending section and field.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace

__all__ = ["ConfigError", "UnknownSuiteError", "ExperimentConfig", "load_config"]


class ConfigError(Exception):
    """Malformed or inconsistent experiment configuration."""


class UnknownSuiteError(Exception):
    """Requested suite or experiment name does not exist."""


@dataclass(frozen=True)
class ExperimentConfig:
    num_points: int = 256
    circumference: float = 2.0 * math.pi
    conformal: str = "cosine"
    k_min: int = 3
    k_max: int = 10
    symbol_preset: str = "gauss"
    velocity_cutoff: float = 4.0
    fiber_points: int = 256
    algebra_preset: str = "shear"
    group_preset: str = "twist"
    haar_k_min: int = 1
    haar_k_max: int = 5
    seed: int = 1234
    output: str = "."
    character_pairs: int = 20

    def __post_init__(self):
        if self.num_points < 8 or self.num_points & (self.num_points - 1):
            raise ConfigError("manifold.num_points must be a power of two (>= 8)")
        if self.circumference <= 0:
            raise ConfigError("manifold.circumference must be positive")
        if self.k_min >= self.k_max:
            raise ConfigError("hgrid.k_min must be strictly less than hgrid.k_max")
        if self.haar_k_min >= self.haar_k_max:
            raise ConfigError("haar.k_min must be strictly less than haar.k_max")
        if self.k_min < 0 or self.haar_k_min < 0:
            raise ConfigError("hgrid/haar exponents must be non-negative")
        if self.velocity_cutoff <= 0:
            raise ConfigError("symbol.velocity_cutoff must be positive")
        if self.fiber_points < 8 or self.fiber_points % 2:
            raise ConfigError("symbol.fiber_points must be even (>= 8)")
        if self.character_pairs < 1:
            raise ConfigError("run.character_pairs must be at least 1")
        if self.seed < 0:
            raise ConfigError("run.seed must be non-negative")

    @property
    def h_values(self) -> list[float]:
        """Geometric deformation grid ``2^{-k}``, largest first."""
        return [2.0 ** (-k) for k in range(self.k_min, self.k_max + 1)]

    @property
    def haar_h_values(self) -> list[float]:
        return [2.0 ** (-k) for k in range(self.haar_k_min, self.haar_k_max + 1)]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=int(seed))


_SCHEMA = {
    "manifold": {
        "num_points": ("num_points", int),
        "circumference": ("circumference", float),
        "conformal": ("conformal", str),
    },
    "hgrid": {
        "k_min": ("k_min", int),
        "k_max": ("k_max", int),
    },
    "symbol": {
        "preset": ("symbol_preset", str),
        "velocity_cutoff": ("velocity_cutoff", float),
        "fiber_points": ("fiber_points", int),
    },
    "algebra": {
        "preset": ("algebra_preset", str),
    },
    "group": {
        "preset": ("group_preset", str),
    },
    "haar": {
        "k_min": ("haar_k_min", int),
        "k_max": ("haar_k_max", int),
    },
    "run": {
        "seed": ("seed", int),
        "output": ("output", str),
        "character_pairs": ("character_pairs", int),
    },
}


def load_config(path: str | None = None) -> ExperimentConfig:
    """Read an INI config file; absent path means all defaults."""
    if path is None:
        return ExperimentConfig()
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    overrides = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown field {section}.{key}")
            attr, cast = _SCHEMA[section][key]
            try:
                overrides[attr] = cast(raw)
            except ValueError as exc:
                raise ConfigError(
                    f"field {section}.{key}: cannot parse {raw!r} as {cast.__name__}"
                ) from exc
    try:
        return ExperimentConfig(**overrides)
    except ConfigError:
        raise
    except TypeError as exc:  # pragma: no cover - schema guards against this
        raise ConfigError(str(exc)) from exc


# Names of the dataclass fields, exported for the CLI help text.
CONFIG_FIELDS = tuple(f.name for f in fields(ExperimentConfig))
