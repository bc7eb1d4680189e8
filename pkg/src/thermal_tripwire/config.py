"""Flat ``key = value`` pipeline configuration.

Precedence is command-line override > config file > built-in default.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

from .background import BackgroundParams
from .detection import DetectionParams
from .frames_io import EntryDirection, atomic_write_text

ALGORITHMS = ("baseline", "multi")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    alpha: float = 0.05
    sigma: float = 0.4
    eta: float = 0.015
    theta_pf: float = 0.015
    gamma: float = 0.2
    use_mrf: bool = True
    mrf_iterations: int = 1
    warmup_frames: int = 1
    k_min_pixels: int = 100
    l_min_pixels: int = 100
    max_assoc_dist: float = math.inf
    window_w: int = 16
    algorithm: str = "multi"
    entry_direction: EntryDirection = EntryDirection.INSIDE_IS_TOP
    initial_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entry_direction", EntryDirection(self.entry_direction))
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.warmup_frames < 1:
            raise ConfigError(f"warmup_frames must be >= 1, got {self.warmup_frames}")
        if self.window_w < 0:
            raise ConfigError(f"window_w must be >= 0, got {self.window_w}")
        if self.initial_count < 0:
            raise ConfigError(f"initial_count must be >= 0, got {self.initial_count}")
        try:
            self.background_params()
            self.detection_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def background_params(self) -> BackgroundParams:
        return BackgroundParams(self.alpha, self.sigma, self.eta, self.theta_pf, self.gamma, self.mrf_iterations)

    def detection_params(self) -> DetectionParams:
        return DetectionParams(self.k_min_pixels, self.l_min_pixels, self.max_assoc_dist)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def to_lines(self) -> list[str]:
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, EntryDirection):
                value = value.value
            elif isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = repr(value)
            out.append(f"{f.name} = {value}")
        return out

    def dump(self, path: str | os.PathLike) -> None:
        atomic_write_text(path, self.to_lines())


_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_assignments(items: Iterable[str], source: str = "override") -> dict:
    """Parse ``key=value`` strings; unknown keys are rejected."""
    values = {}
    for n, item in enumerate(items, start=1):
        line = item.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {n}: expected key = value, got {item.strip()!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"{source}: line {n}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path: str | os.PathLike | None = None, overrides: Mapping | Iterable[str] | None = None) -> Config:
    values: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        values.update(parse_assignments(text.splitlines(), source=str(path)))
    if overrides:
        if isinstance(overrides, Mapping):
            unknown = set(overrides) - set(_TYPES)
            if unknown:
                raise ConfigError(f"unknown keys {sorted(unknown)}")
            values.update(overrides)
        else:
            values.update(parse_assignments(overrides))
    try:
        return Config(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
